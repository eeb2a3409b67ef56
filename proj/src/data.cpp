#include "sfd/data.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sfd/rng.hpp"

namespace sfd {

Matrix swiss_roll(int n, double noise_std, std::uint64_t seed) {
    if (n < 1) throw InvalidParameter("swiss_roll needs n >= 1");
    if (noise_std < 0.0) throw InvalidParameter("noise_std must be >= 0");

    constexpr double lo = 1.5 * std::numbers::pi;
    constexpr double hi = 4.5 * std::numbers::pi;
    Rng rng(mix_seed(seed, 0x7377726c));
    Matrix out(n, 2);
    for (int i = 0; i < n; ++i) {
        double t = lo + (hi - lo) * rng.uniform();
        out(i, 0) = t * std::cos(t) / hi + noise_std * rng.normal();
        out(i, 1) = t * std::sin(t) / hi + noise_std * rng.normal();
    }
    // Standardize per axis using the batch statistics.
    for (int j = 0; j < 2; ++j) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += out(i, j);
        mean /= n;
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            double c = out(i, j) - mean;
            var += c * c;
        }
        var /= n;
        double inv_std = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        for (int i = 0; i < n; ++i) out(i, j) = (out(i, j) - mean) * inv_std;
    }
    return out;
}

Matrix gaussian_mixture(int n, const Matrix& centers, double std_dev, std::uint64_t seed) {
    if (n < 1) throw InvalidParameter("gaussian_mixture needs n >= 1");
    if (centers.rows < 1) throw InvalidParameter("gaussian_mixture needs at least one center");
    if (std_dev < 0.0) throw InvalidParameter("std must be >= 0");

    Rng rng(mix_seed(seed, 0x676d6978));
    Matrix out(n, centers.cols);
    for (int i = 0; i < n; ++i) {
        const double* c = centers.row(rng.below(centers.rows));
        for (std::size_t j = 0; j < centers.cols; ++j)
            out(i, j) = c[j] + std_dev * rng.normal();
    }
    return out;
}

void save_csv(const std::string& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (std::size_t j = 0; j < m.cols; ++j) out << (j ? ",x" : "x") << j;
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) out << ',';
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

Matrix load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw ParseError(path + ": empty file or missing header");

    std::vector<Vec> rows;
    std::size_t cols = 0;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        Vec row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw ParseError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            row.push_back(v);
        }
        if (row.empty()) throw ParseError(path + ":" + std::to_string(lineno) + ": empty row");
        if (cols == 0) cols = row.size();
        if (row.size() != cols)
            throw DimensionMismatch(path + ":" + std::to_string(lineno) + ": expected " +
                                    std::to_string(cols) + " columns, got " +
                                    std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");

    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), m.row(i));
    return m;
}

}  // namespace sfd
