// Copyright 2026 The gbdmap Authors
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

// Closed-form maximizers used to bound tilted factor blocks.

#ifndef GBDMAP_CLOSED_FORM_H_
#define GBDMAP_CLOSED_FORM_H_

#include <span>

#include <Eigen/Dense>

#include "gbdmap/domain.h"

namespace gbdmap {

// log det of a symmetric matrix, or -inf when it is not positive definite.
double LogDetPd(const Eigen::MatrixXd& m);

// Maps a column-major dim*dim span onto a matrix copy.
Eigen::MatrixXd AsMatrix(std::span<const double> x, int dim);
Eigen::VectorXd AsVector(std::span<const double> x);

// max sum_j c_j log p_j + g_j p_j over {p_j >= floor, sum p = 1}.
// Coordinates with c_j < 0 are replaced by their chord, which makes the
// result an upper bound (exact = false) instead of the supremum. With
// lin_coef = 0 the argmax is still the exact maximizer.
SupResult MaxLogLinearOnSimplex(std::span<const double> log_coef,
                                std::span<const double> lin_coef,
                                double floor);

// max (a/2) log det L - <C, L> over {eig(L) >= eig_floor, tr L <= trace_cap}.
// For a < 0 the log det term is replaced by a chord over-estimator.
SupResult MaxLogDetLinearOnPd(double a, const Eigen::MatrixXd& c,
                              double eig_floor, double trace_cap);

// Upper bound on
//   sup_{m in box, L in pd} scale * (m' L y - m' L m / 2) - <u, m> - <U, L>
// where y is `center`. Exact only when u and U vanish and y lies in the box.
SupResult QuadraticFormSupBound(double scale, const Eigen::VectorXd& center,
                                const Eigen::VectorXd& u,
                                const Eigen::MatrixXd& big_u, const Domain& box,
                                const Domain& pd);

// Global max of -x'Qx/2 + b'x over a box of dimension at most 8, found by
// enumerating every active set of the KKT system.
SupResult MaxQuadraticOnBox(const Eigen::MatrixXd& q, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper);

}  // namespace gbdmap

#endif  // GBDMAP_CLOSED_FORM_H_
