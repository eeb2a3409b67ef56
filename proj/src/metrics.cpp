#include "sfd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sfd/rng.hpp"
#include "sfd/sample.hpp"

namespace sfd {

namespace {

// Mean pairwise distance between all rows of a and b. Row partials keep the
// reduction order fixed regardless of thread count.
double mean_cross_distance(const Matrix& a, const Matrix& b) {
    std::vector<double> row_sum(a.rows, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        const double* ra = a.row(i);
        for (std::size_t j = 0; j < b.rows; ++j)
            s += euclidean_distance(ra, b.row(j), a.cols);
        row_sum[i] = s;
    }
    double total = std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
    return total / (static_cast<double>(a.rows) * static_cast<double>(b.rows));
}

void check_samples(const Matrix& a, const Matrix& b) {
    if (a.rows < 2 || b.rows < 2) throw InvalidParameter("metrics need at least 2 samples per side");
    if (a.cols != b.cols) throw DimensionMismatch("sample dimensions differ");
}

}  // namespace

double energy_distance(const Matrix& a, const Matrix& b) {
    check_samples(a, b);
    return 2.0 * mean_cross_distance(a, b) - mean_cross_distance(a, a) -
           mean_cross_distance(b, b);
}

double energy_distance_serial(const Matrix& a, const Matrix& b) {
    check_samples(a, b);
    auto cross = [](const Matrix& x, const Matrix& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i)
            for (std::size_t j = 0; j < y.rows; ++j)
                s += euclidean_distance(x.row(i), y.row(j), x.cols);
        return s / (static_cast<double>(x.rows) * static_cast<double>(y.rows));
    };
    return 2.0 * cross(a, b) - cross(a, a) - cross(b, b);
}

double sliced_wasserstein(const Matrix& a, const Matrix& b, int n_projections,
                          std::uint64_t seed) {
    check_samples(a, b);
    if (a.rows != b.rows) throw InvalidParameter("sliced Wasserstein needs equal sample sizes");
    if (n_projections < 1) throw InvalidParameter("need at least one projection");
    const std::size_t n = a.rows;
    const std::size_t d = a.cols;

    Rng rng(mix_seed(seed, 0x7377));
    double total = 0.0;
    std::vector<double> pa(n), pb(n);
    for (int p = 0; p < n_projections; ++p) {
        Vec dir(d);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                dir[j] = rng.normal();
                norm += dir[j] * dir[j];
            }
            norm = std::sqrt(norm);
        } while (norm == 0.0);
        for (std::size_t j = 0; j < d; ++j) dir[j] /= norm;

        for (std::size_t i = 0; i < n; ++i) {
            double sa = 0.0, sb = 0.0;
            const double* ra = a.row(i);
            const double* rb = b.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                sa += ra[j] * dir[j];
                sb += rb[j] * dir[j];
            }
            pa[i] = sa;
            pb[i] = sb;
        }
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double diff = pa[i] - pb[i];
            sq += diff * diff;
        }
        total += std::sqrt(sq / static_cast<double>(n));
    }
    return total / n_projections;
}

ConsistencyScore consistency_score(const ModelBundle& teacher, const ModelBundle& student, int n,
                                   std::uint64_t seed) {
    if (n < 2) throw InvalidParameter("consistency score needs n >= 2");
    if (teacher.net.input_dim != student.net.input_dim)
        throw DimensionMismatch("teacher and student dimensions differ");
    const int d = teacher.net.input_dim;

    Matrix noise(n, d);
    for (int i = 0; i < n; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        for (int j = 0; j < d; ++j) noise(i, j) = rng.normal();
    }

    Matrix out_t = ddim_sample(teacher, noise);
    Matrix out_s = ddim_sample(student, noise);

    double paired = 0.0;
    for (int i = 0; i < n; ++i)
        paired += squared_distance(out_t.row(i), out_s.row(i), d);
    paired /= n;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(mix_seed(seed, 0x7065726d));
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    double baseline = 0.0;
    for (int i = 0; i < n; ++i)
        baseline += squared_distance(out_t.row(i), out_s.row(perm[i]), d);
    baseline /= n;

    return {paired, baseline};
}

}  // namespace sfd
