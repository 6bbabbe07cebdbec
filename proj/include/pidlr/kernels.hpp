#pragma once

#include <vector>

#include "pidlr/linalg.hpp"

namespace pidlr {

// Projected cosine similarities between one target and a pool:
// out[i] = cosine(W_c * target, W'_c * pool[i]).
//
// The OpenMP variant parallelizes over pool entries; each entry's arithmetic
// is identical to the serial variant, so results match bitwise.
void projected_similarities_serial(const Mat& w_c, const Mat& w_cp, const Vec& target,
                                   const std::vector<Vec>& pool, std::vector<double>& out);
void projected_similarities_parallel(const Mat& w_c, const Mat& w_cp, const Vec& target,
                                     const std::vector<Vec>& pool, std::vector<double>& out);

}  // namespace pidlr
