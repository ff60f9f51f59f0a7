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

#include "nfm/fresnel.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace nfm {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 200;
constexpr double kSeriesLimit = 1.5;

// C + jS for 0 < x <= 1.5. Terms alternate between the two series:
// C = sum_k (-1)^k (pi/2)^(2k) x^(4k+1) / ((2k)! (4k+1))
// S = sum_k (-1)^k (pi/2)^(2k+1) x^(4k+3) / ((2k+1)! (4k+3))
FresnelPair series(double x)
{
    const double z = 0.5 * std::numbers::pi * x * x;
    double term = x;  // z^k x / k!
    double c = x;
    double s = 0.0;
    for (int k = 1; k < kMaxIter; ++k) {
        term *= z / k;
        const double contrib = term / (2 * k + 1);
        // k odd feeds S, k even feeds C; signs follow (-1)^floor(k/2).
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 1)
            s += sign * contrib;
        else
            c += sign * contrib;
        if (term < kEps * std::abs(k % 2 == 1 ? s : c))
            break;
    }
    return {c, s};
}

// x > 1.5: C + jS = (1+j)/2 [1 - exp(j pi x^2 / 2) h], with h from the
// continued fraction of erfc evaluated on the diagonal.
FresnelPair continued_fraction(double x)
{
    using cplx = std::complex<double>;
    const double tiny = std::numeric_limits<double>::min() / kEps;
    const double pix2 = std::numbers::pi * x * x;

    cplx b(1.0, -pix2);
    cplx cc(1.0 / tiny, 0.0);
    cplx d = 1.0 / b;
    cplx h = d;
    int n = -1;
    for (int k = 2; k < kMaxIter; ++k) {
        n += 2;
        const double a = -static_cast<double>(n) * (n + 1);
        b += 4.0;
        d = 1.0 / (a * d + b);
        cc = b + a / cc;
        const cplx del = cc * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < kEps)
            break;
    }
    h *= cplx(x, -x);
    const cplx cs = cplx(0.5, 0.5) * (1.0 - std::polar(1.0, 0.5 * pix2) * h);
    return {cs.real(), cs.imag()};
}

}  // namespace

FresnelPair fresnel(double x)
{
    const double ax = std::abs(x);
    FresnelPair out;
    if (ax == 0.0)
        return out;
    out = ax <= kSeriesLimit ? series(ax) : continued_fraction(ax);
    if (x < 0.0) {
        out.C = -out.C;
        out.S = -out.S;
    }
    return out;
}

}  // namespace nfm
