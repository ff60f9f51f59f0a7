// SPDX-License-Identifier: Apache-2.0
//
// nfmotion - near-field motion parameter estimation for large linear arrays
// Copyright (C) 2026 The nfmotion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>

namespace nfm::detail {

enum class FftDirection { forward, backward };

/// In-place unnormalized 1D DFT of `n` contiguous samples.
/// forward:  X_k = sum_i x_i exp(-j 2 pi i k / n)
/// backward: X_k = sum_i x_i exp(+j 2 pi i k / n)
///
/// Plans are created once per (n, direction) under a lock; execution is
/// thread-safe, so callers may run this from inside OpenMP regions.
void fft_inplace(std::complex<double>* data, int n, FftDirection dir);

}  // namespace nfm::detail
