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

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace avifront {

using cplx = std::complex<double>;

bool is_power_of_two(size_t n);
size_t next_power_of_two(size_t n);

/// In-place iterative radix-2 transform. n must be a power of two.
/// inverse=true applies the conjugate transform and the 1/n factor.
void fft_inplace(std::vector<cplx>& data, bool inverse);

std::vector<cplx> fft(const std::vector<cplx>& data);
std::vector<cplx> ifft(const std::vector<cplx>& data);

/// Full linear convolution of a and b (length |a|+|b|-1) via zero-padded FFT.
std::vector<cplx> fft_conv_full(const std::vector<cplx>& a,
                                const std::vector<cplx>& b);

}  // namespace avifront
