// Copyright 2026 The Avifront Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "avifront/commands.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "avifront/classifier.h"
#include "avifront/gradcheck.h"
#include "avifront/io.h"
#include "avifront/rng.h"
#include "avifront/stats.h"
#include "avifront/trainer.h"
#include "avifront/wav_io.h"

namespace fs = std::filesystem;

namespace avifront {

namespace {

void ensure_dir(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw DataError("cannot create directory " + path + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw DataError("failed writing file: " + path);
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SourcedEntry {
  ManifestEntry entry;
  size_t source_index = 0;
};

struct LoadedManifests {
  std::vector<ManifestSource> sources;
  std::vector<SourcedEntry> entries;
};

LoadedManifests load_all_manifests(const RunConfig& rc) {
  if (rc.manifests.empty()) {
    throw ConfigError("no manifests configured (use --manifest name=path)");
  }
  LoadedManifests out;
  out.sources = rc.manifests;
  for (size_t s = 0; s < rc.manifests.size(); ++s) {
    const auto entries =
        load_manifest_file(rc.manifests[s].path, rc.manifests[s].name);
    for (const auto& entry : entries) out.entries.push_back({entry, s});
  }
  return out;
}

/// Audio location: <audio_root>/<dataset>/<item>.wav when a root is set,
/// otherwise next to the manifest file.
std::string clip_path(const RunConfig& rc, const ManifestSource& source,
                      const ManifestEntry& entry) {
  if (!rc.audio_root.empty()) {
    return (fs::path(rc.audio_root) / entry.dataset_id /
            (entry.item_id + ".wav"))
        .string();
  }
  const fs::path manifest_dir = fs::path(source.path).parent_path();
  return (manifest_dir / (entry.item_id + ".wav")).string();
}

SplitAssignment resolve_split(const RunConfig& rc,
                              const LoadedManifests& data,
                              bool* computed_here) {
  if (computed_here != nullptr) *computed_here = false;
  if (!rc.split_file.empty()) {
    return load_split_file(rc.split_file);
  }
  std::vector<ManifestEntry> flat;
  flat.reserve(data.entries.size());
  for (const auto& se : data.entries) flat.push_back(se.entry);
  if (computed_here != nullptr) *computed_here = true;
  return stratified_split(flat, rc.ratios, rc.split_seed);
}

struct SplitData {
  std::vector<SourcedEntry> entries;
  std::vector<Waveform> waveforms;
  std::vector<int> labels;
};

SplitData gather_split(const RunConfig& rc, const LoadedManifests& data,
                       const SplitAssignment& assignment, Split split,
                       int sample_rate_hz, double clip_s) {
  SplitData out;
  for (const auto& se : data.entries) {
    if (assignment.of(se.entry) != split) continue;
    const std::string path = clip_path(rc, data.sources[se.source_index],
                                       se.entry);
    Waveform w = load_clip(path, sample_rate_hz, clip_s);
    w = normalize_dbfs(w, -2.0);
    out.entries.push_back(se);
    out.waveforms.push_back(std::move(w));
    out.labels.push_back(se.entry.has_bird);
  }
  return out;
}

Checkpoint build_checkpoint(const std::vector<ParamTensor*>& params,
                            const TrainResult& result,
                            const std::string& config_echo) {
  Checkpoint checkpoint = snapshot_params(params, config_echo);
  for (size_t t = 0; t < checkpoint.tensors.size(); ++t) {
    checkpoint.tensors[t].values = result.best_params[t];
  }
  checkpoint.has_optimizer = true;
  checkpoint.optimizer_step =
      static_cast<uint64_t>(result.best_optimizer_step);
  checkpoint.moment1 = result.best_moment1;
  checkpoint.moment2 = result.best_moment2;
  return checkpoint;
}

uint64_t derive_seed(uint64_t base, uint64_t salt) {
  uint64_t state = base ^ (salt * 0x9e3779b97f4a7c15ULL);
  return Rng::splitmix64(state);
}

ClassifierConfig classifier_config_for(const RunConfig& rc) {
  ClassifierConfig cc;
  cc.input_channels =
      rc.kind == FrontendKind::Strf ? rc.frontend.strf_n_filters : 1;
  return cc;
}

struct SystemModel {
  std::string name;
  RunConfig config;
  std::unique_ptr<Frontend> frontend;
  std::unique_ptr<Classifier> classifier;
};

SystemModel load_system(const std::string& name,
                        const std::string& checkpoint_path) {
  Checkpoint checkpoint;
  try {
    checkpoint = read_checkpoint(checkpoint_path);
  } catch (const DataError& e) {
    throw DataError("system " + name + ": " + e.what());
  }
  SystemModel system;
  system.name = name;
  system.config =
      resolve_run_config(parse_config_text(checkpoint.config_echo), {});
  system.frontend =
      make_frontend(system.config.kind, system.config.frontend,
                    derive_seed(system.config.train.seed, 1));
  system.classifier = std::make_unique<Classifier>(
      classifier_config_for(system.config),
      derive_seed(system.config.train.seed, 2));
  std::vector<ParamTensor*> params =
      training_params(*system.frontend, *system.classifier);
  restore_params(checkpoint, params);
  return system;
}

std::string train_log_csv(const TrainResult& result) {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,val_loss,val_acc,lr\n";
  for (const auto& row : result.history) {
    out << row.epoch << "," << g17(row.train_loss) << "," << g17(row.train_acc)
        << "," << g17(row.val_loss) << "," << g17(row.val_acc) << ","
        << g17(row.lr) << "\n";
  }
  return out.str();
}

}  // namespace

int cmd_extract(const RunConfig& rc, int jobs, bool force) {
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  const LoadedManifests data = load_all_manifests(rc);
  ensure_dir(rc.output_dir);
  for (const auto& source : data.sources) {
    ensure_dir((fs::path(rc.output_dir) / source.name).string());
  }

  std::atomic<size_t> next{0};
  std::atomic<size_t> written{0};
  std::atomic<size_t> skipped{0};
  std::atomic<size_t> failed{0};
  std::mutex log_mutex;

  auto worker = [&]() {
    // One frontend per worker: learnable frontends cache forward state.
    std::unique_ptr<Frontend> frontend =
        make_frontend(rc.kind, rc.frontend, derive_seed(rc.train.seed, 1));
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= data.entries.size()) break;
      const SourcedEntry& se = data.entries[i];
      const std::string out_path =
          (fs::path(rc.output_dir) / se.entry.dataset_id /
           (se.entry.item_id + ".avfe"))
              .string();
      try {
        if (!force && fs::exists(out_path)) {
          skipped.fetch_add(1);
          continue;
        }
        const std::string in_path =
            clip_path(rc, data.sources[se.source_index], se.entry);
        Waveform w = load_clip(in_path, rc.frontend.sample_rate_hz, rc.clip_s);
        w = normalize_dbfs(w, -2.0);
        const FeatureMap features = frontend->forward(w);
        write_feature_file(out_path, static_cast<uint32_t>(rc.kind), features);
        written.fetch_add(1);
      } catch (const std::exception& e) {
        failed.fetch_add(1);
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << "extract failed for " << se.entry.dataset_id << "/"
                  << se.entry.item_id << ": " << e.what() << "\n";
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::cout << "extracted " << written.load() << " feature files, skipped "
            << skipped.load() << ", failed " << failed.load() << "\n";
  return failed.load() > 0 ? 2 : 0;
}

int cmd_train(const RunConfig& rc) {
  const LoadedManifests data = load_all_manifests(rc);
  bool computed_split = false;
  const SplitAssignment assignment = resolve_split(rc, data, &computed_split);
  ensure_dir(rc.output_dir);
  write_text_file((fs::path(rc.output_dir) / "config.txt").string(),
                  rc.render());
  if (computed_split) {
    std::vector<ManifestEntry> flat;
    for (const auto& se : data.entries) flat.push_back(se.entry);
    write_split_file((fs::path(rc.output_dir) / "split.csv").string(), flat,
                     assignment);
  }

  const SplitData train = gather_split(rc, data, assignment, Split::Train,
                                       rc.frontend.sample_rate_hz, rc.clip_s);
  const SplitData val = gather_split(rc, data, assignment, Split::Val,
                                     rc.frontend.sample_rate_hz, rc.clip_s);
  if (train.waveforms.empty()) throw DataError("training split is empty");

  std::unique_ptr<Frontend> frontend =
      make_frontend(rc.kind, rc.frontend, derive_seed(rc.train.seed, 1));
  Classifier classifier(classifier_config_for(rc),
                        derive_seed(rc.train.seed, 2));

  std::cout << "training frontend=" << to_string(rc.kind) << " on "
            << train.waveforms.size() << " train / " << val.waveforms.size()
            << " val clips\n";
  const TrainResult result =
      train_model(*frontend, classifier, train.waveforms, train.labels,
                  val.waveforms, val.labels, rc.train);

  write_text_file((fs::path(rc.output_dir) / "train_log.csv").string(),
                  train_log_csv(result));
  if (result.aborted) {
    std::cerr << "training aborted: " << result.abort_reason << "\n";
    return 2;
  }

  const std::vector<ParamTensor*> params =
      training_params(*frontend, classifier);
  const Checkpoint checkpoint = build_checkpoint(params, result, rc.render());
  write_checkpoint((fs::path(rc.output_dir) / "checkpoint.avck").string(),
                   checkpoint);

  for (const auto& row : result.history) {
    std::printf(
        "epoch %d: train_loss=%.4f train_acc=%.4f val_loss=%.4f "
        "val_acc=%.4f lr=%g\n",
        row.epoch, row.train_loss, row.train_acc, row.val_loss, row.val_acc,
        row.lr);
  }
  std::printf("best epoch %d (val_loss=%.6f); checkpoint written to %s\n",
              result.best_epoch, result.best_val_loss,
              (fs::path(rc.output_dir) / "checkpoint.avck").c_str());
  return 0;
}

int cmd_eval(const RunConfig& rc, const std::string& checkpoint_path,
             const std::string& split_name) {
  const Split split = split_from_string(split_name);
  SystemModel system = load_system("eval", checkpoint_path);
  const LoadedManifests data = load_all_manifests(rc);
  const SplitAssignment assignment = resolve_split(rc, data, nullptr);
  const SplitData eval_set =
      gather_split(rc, data, assignment, split,
                   system.config.frontend.sample_rate_hz,
                   system.config.clip_s);
  if (eval_set.waveforms.empty()) {
    throw DataError("evaluation split '" + split_name + "' is empty");
  }

  const EvalResult result = evaluate(*system.frontend, *system.classifier,
                                     eval_set.waveforms, eval_set.labels);
  ensure_dir(rc.output_dir);
  std::ostringstream csv;
  csv << "itemid,dataset,label,prob,pred\n";
  for (size_t i = 0; i < eval_set.entries.size(); ++i) {
    const auto& entry = eval_set.entries[i].entry;
    csv << entry.item_id << "," << entry.dataset_id << ","
        << entry.has_bird << "," << g17(result.probs[i]) << ","
        << result.preds[i] << "\n";
  }
  write_text_file((fs::path(rc.output_dir) / "predictions.csv").string(),
                  csv.str());
  std::printf("%s: n=%zu loss=%.6f accuracy=%.4f\n", split_name.c_str(),
              eval_set.waveforms.size(), result.loss, result.accuracy);
  return 0;
}

int cmd_compare(const RunConfig& rc, const std::vector<SystemSpec>& specs) {
  if (specs.size() < 2) {
    throw ConfigError("compare needs at least 2 --system name=checkpoint");
  }
  const LoadedManifests data = load_all_manifests(rc);
  const SplitAssignment assignment = resolve_split(rc, data, nullptr);

  std::vector<SystemModel> systems;
  for (const auto& spec : specs) {
    systems.push_back(load_system(spec.name, spec.checkpoint_path));
  }

  // Test waveforms prepared once per distinct (rate, clip length).
  std::map<std::pair<int, double>, SplitData> prepared;
  std::vector<std::string> names;
  std::vector<std::vector<int>> preds;
  const SplitData* reference_set = nullptr;
  for (auto& system : systems) {
    const std::pair<int, double> key = {
        system.config.frontend.sample_rate_hz, system.config.clip_s};
    auto it = prepared.find(key);
    if (it == prepared.end()) {
      it = prepared
               .emplace(key, gather_split(rc, data, assignment, Split::Test,
                                          key.first, key.second))
               .first;
    }
    const SplitData& test_set = it->second;
    if (test_set.waveforms.empty()) throw DataError("test split is empty");
    reference_set = &test_set;
    const EvalResult result = evaluate(*system.frontend, *system.classifier,
                                       test_set.waveforms, test_set.labels);
    names.push_back(system.name);
    preds.push_back(result.preds);
  }
  const std::vector<int>& labels = reference_set->labels;

  // Accuracy table: overall plus per-dataset breakdown.
  std::ostringstream acc_csv;
  acc_csv << "system,scope,n,accuracy\n";
  std::ostringstream acc_text;
  acc_text << "Test accuracy (n=" << labels.size() << "):\n";
  for (size_t s = 0; s < systems.size(); ++s) {
    const double overall = accuracy(preds[s], labels);
    acc_csv << names[s] << ",overall," << labels.size() << ","
            << g17(overall) << "\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-12s overall %.4f", names[s].c_str(),
                  overall);
    acc_text << buf;
    for (const auto& source : data.sources) {
      std::vector<int> p, y;
      for (size_t i = 0; i < labels.size(); ++i) {
        if (reference_set->entries[i].entry.dataset_id != source.name) {
          continue;
        }
        p.push_back(preds[s][i]);
        y.push_back(labels[i]);
      }
      if (p.empty()) continue;
      const double a = accuracy(p, y);
      acc_csv << names[s] << "," << source.name << "," << p.size() << ","
              << g17(a) << "\n";
      std::snprintf(buf, sizeof(buf), "  %s %.4f", source.name.c_str(), a);
      acc_text << buf;
    }
    acc_text << "\n";
  }

  // Paired bootstrap subsets, overall and per dataset.
  const int n_subsets = 30;
  const int subset_size = std::min<size_t>(1000, labels.size());
  const std::vector<AccuracySamples> overall_samples = bootstrap_subsets(
      names, preds, labels, n_subsets, subset_size, rc.train.seed);
  std::vector<DatasetSamples> per_dataset;
  for (const auto& source : data.sources) {
    std::vector<std::vector<int>> ds_preds(systems.size());
    std::vector<int> ds_labels;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (reference_set->entries[i].entry.dataset_id != source.name) continue;
      for (size_t s = 0; s < systems.size(); ++s) {
        ds_preds[s].push_back(preds[s][i]);
      }
      ds_labels.push_back(labels[i]);
    }
    if (ds_labels.empty()) continue;
    DatasetSamples ds;
    ds.dataset = source.name;
    ds.systems = bootstrap_subsets(
        names, ds_preds, ds_labels, n_subsets,
        std::min<size_t>(subset_size, ds_labels.size()),
        rc.train.seed ^ Rng::hash_string(source.name));
    per_dataset.push_back(std::move(ds));
  }

  const SignificanceReport report =
      significance_pipeline(overall_samples, per_dataset, 0.05);

  const std::string text =
      acc_text.str() + "\n" + render_significance_text(report);
  ensure_dir(rc.output_dir);
  write_text_file((fs::path(rc.output_dir) / "accuracy.csv").string(),
                  acc_csv.str());
  write_text_file((fs::path(rc.output_dir) / "report.txt").string(), text);
  write_text_file((fs::path(rc.output_dir) / "report.csv").string(),
                  significance_csv(report));
  std::cout << text;
  return 0;
}

int cmd_gradcheck(const RunConfig& rc) {
  if (!frontend_is_learnable(rc.kind)) {
    throw ConfigError("frontend '" + to_string(rc.kind) +
                      "' has no learnable parameters");
  }
  const double clip_s = std::min(rc.clip_s, 0.2);
  Waveform w;
  w.sample_rate_hz = rc.frontend.sample_rate_hz;
  const size_t n = static_cast<size_t>(clip_s * rc.frontend.sample_rate_hz);
  w.samples.resize(std::max<size_t>(n, 64));
  Rng rng(rc.train.seed);
  for (double& x : w.samples) x = 0.1 * rng.normal();

  std::unique_ptr<Frontend> frontend =
      make_frontend(rc.kind, rc.frontend, derive_seed(rc.train.seed, 1));
  const auto groups = frontend_grad_check_groups(
      *frontend, w, derive_seed(rc.train.seed, 3), 1e-5, 100);

  bool all_pass = true;
  for (const auto& g : groups) {
    const bool pass = g.report.max_rel_err < 1e-4;
    all_pass = all_pass && pass;
    std::printf("group %-24s max_rel_err=%.3e (n=%zu) %s\n", g.group.c_str(),
                g.report.max_rel_err, g.report.n_checked,
                pass ? "PASS" : "FAIL");
  }
  if (!all_pass) {
    std::cerr << "gradient check failed for frontend "
              << to_string(rc.kind) << "\n";
    return 2;
  }
  return 0;
}

int cmd_split(const RunConfig& rc) {
  const LoadedManifests data = load_all_manifests(rc);
  std::vector<ManifestEntry> flat;
  for (const auto& se : data.entries) flat.push_back(se.entry);
  const SplitAssignment assignment =
      stratified_split(flat, rc.ratios, rc.split_seed);
  ensure_dir(rc.output_dir);
  const std::string path = (fs::path(rc.output_dir) / "split.csv").string();
  write_split_file(path, flat, assignment);

  std::map<std::string, std::array<size_t, 3>> counts;
  for (const auto& entry : flat) {
    const std::string cell =
        entry.dataset_id + " hasbird=" + std::to_string(entry.has_bird);
    counts[cell][static_cast<int>(assignment.of(entry))]++;
  }
  for (const auto& [cell, c] : counts) {
    std::printf("%s: train=%zu val=%zu test=%zu\n", cell.c_str(), c[0], c[1],
                c[2]);
  }
  std::printf("split written to %s (%zu items)\n", path.c_str(), flat.size());
  return 0;
}

int cmd_synth(const RunConfig& rc) {
  const std::vector<SynthClip> clips = synth_dataset(rc.synth);
  ensure_dir(rc.output_dir);
  std::ostringstream manifest;
  manifest << "itemid,hasbird,snr_db\n";
  size_t positives = 0;
  for (const auto& clip : clips) {
    write_wav_pcm16(
        (fs::path(rc.output_dir) / (clip.item_id + ".wav")).string(),
        clip.waveform);
    char snr[32];
    std::snprintf(snr, sizeof(snr), "%.3f", clip.snr_db);
    manifest << clip.item_id << "," << clip.label << "," << snr << "\n";
    positives += clip.label;
  }
  write_text_file((fs::path(rc.output_dir) / "manifest.csv").string(),
                  manifest.str());
  std::printf("wrote %zu clips (%zu positive / %zu negative) to %s\n",
              clips.size(), positives, clips.size() - positives,
              rc.output_dir.c_str());
  return 0;
}

}  // namespace avifront
