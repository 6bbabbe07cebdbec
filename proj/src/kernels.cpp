#include "pidlr/kernels.hpp"

#include <cstdint>

#include "pidlr/model.hpp"

namespace pidlr {

namespace {

double one_similarity(const Mat& w_cp, const Vec& proj_target, const Vec& rep) {
    Vec proj(w_cp.rows, 0.0f);
    matvec(w_cp, rep, proj);
    return cosine_similarity(proj_target, proj);
}

}  // namespace

void projected_similarities_serial(const Mat& w_c, const Mat& w_cp, const Vec& target,
                                   const std::vector<Vec>& pool, std::vector<double>& out) {
    Vec proj_target(w_c.rows, 0.0f);
    matvec(w_c, target, proj_target);
    out.resize(pool.size());
    for (size_t i = 0; i < pool.size(); ++i) out[i] = one_similarity(w_cp, proj_target, pool[i]);
}

void projected_similarities_parallel(const Mat& w_c, const Mat& w_cp, const Vec& target,
                                     const std::vector<Vec>& pool, std::vector<double>& out) {
    Vec proj_target(w_c.rows, 0.0f);
    matvec(w_c, target, proj_target);
    out.resize(pool.size());
    const int64_t n = static_cast<int64_t>(pool.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) out[i] = one_similarity(w_cp, proj_target, pool[i]);
}

}  // namespace pidlr
