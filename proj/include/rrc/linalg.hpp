#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrc {

/// Dense column-major matrix sized for patch groups (sides up to a few hundred).
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols)
        : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int r, int c) { return a_[static_cast<std::size_t>(c) * rows_ + r]; }
    double operator()(int r, int c) const { return a_[static_cast<std::size_t>(c) * rows_ + r]; }

    double* col(int c) { return a_.data() + static_cast<std::size_t>(c) * rows_; }
    const double* col(int c) const { return a_.data() + static_cast<std::size_t>(c) * rows_; }

    std::vector<double>& storage() { return a_; }
    const std::vector<double>& storage() const { return a_; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) t(c, r) = m(r, c);
    return t;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (int j = 0; j < b.cols(); ++j) {
        double* cj = c.col(j);
        for (int k = 0; k < a.cols(); ++k) {
            const double bkj = b(k, j);
            if (bkj == 0.0) continue;
            const double* ak = a.col(k);
            for (int i = 0; i < a.rows(); ++i) cj[i] += ak[i] * bkj;
        }
    }
    return c;
}

/// Thin SVD factors: input = left * diag(sigma) * right^T, sigma descending.
struct SvdFactors {
    Matrix left;                 // d x j, orthonormal columns
    std::vector<double> sigma;   // length j, descending, nonnegative
    Matrix right;                // m x j, orthonormal columns
};

namespace detail {

inline double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline void rotate_cols(double* p, double* q, int n, double c, double s) {
    for (int i = 0; i < n; ++i) {
        const double vp = p[i], vq = q[i];
        p[i] = c * vp - s * vq;
        q[i] = s * vp + c * vq;
    }
}

// Deterministic orthonormal completion for zero singular directions: take the
// first canonical basis vector with enough residual after projecting out the
// columns already fixed.
inline void complete_column(Matrix& u, int target, int fixed_upto) {
    const int n = u.rows();
    std::vector<double> v(n);
    for (int cand = 0; cand < n; ++cand) {
        std::fill(v.begin(), v.end(), 0.0);
        v[cand] = 1.0;
        for (int k = 0; k < fixed_upto; ++k) {
            if (k == target) continue;
            const double* uk = u.col(k);
            const double proj = dot(uk, v.data(), n);
            for (int i = 0; i < n; ++i) v[i] -= proj * uk[i];
        }
        const double nrm = std::sqrt(dot(v.data(), v.data(), n));
        if (nrm > 0.5) {
            double* ut = u.col(target);
            for (int i = 0; i < n; ++i) ut[i] = v[i] / nrm;
            return;
        }
    }
    throw std::runtime_error("svd_thin: failed to complete orthonormal basis");
}

}  // namespace detail

/// Thin SVD by one-sided (Hestenes) Jacobi on the side with fewer columns.
/// Convergence: normalized off-diagonal mass below 1e-12, at most 60 sweeps.
/// Sign convention: in each left vector the entry of largest magnitude is made
/// positive (ties broken by lowest index). Singular values below
/// 1e-12 * sigma[0] are treated as exactly zero.
inline SvdFactors svd_thin(const Matrix& mat) {
    const int d = mat.rows(), m = mat.cols();
    if (d < 1 || m < 1) throw std::invalid_argument("svd_thin: empty matrix");
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < d; ++r)
            if (!std::isfinite(mat(r, c)))
                throw std::invalid_argument("svd_thin: non-finite entry at (" + std::to_string(r) +
                                            "," + std::to_string(c) + ") value " +
                                            std::to_string(mat(r, c)));

    const bool transposed = m > d;           // work with rows >= cols
    Matrix b = transposed ? transpose(mat) : mat;
    const int n = b.rows();
    const int k = b.cols();                  // k = min(d, m)
    Matrix v = Matrix::identity(k);

    const double tol = 1e-12;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < k - 1; ++p) {
            for (int q = p + 1; q < k; ++q) {
                double* bp = b.col(p);
                double* bq = b.col(q);
                const double alpha = detail::dot(bp, bp, n);
                const double beta = detail::dot(bq, bq, n);
                const double gamma = detail::dot(bp, bq, n);
                if (alpha == 0.0 || beta == 0.0 || gamma == 0.0) continue;
                // Separate roots: alpha*beta can underflow for tiny columns.
                const double corr = std::fabs(gamma) / (std::sqrt(alpha) * std::sqrt(beta));
                if (corr > off) off = corr;
                if (!(corr > tol)) continue;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                detail::rotate_cols(bp, bq, n, c, s);
                detail::rotate_cols(v.col(p), v.col(q), k, c, s);
            }
        }
        if (off <= tol) break;
    }

    std::vector<double> sig(k);
    for (int j = 0; j < k; ++j) sig[j] = std::sqrt(detail::dot(b.col(j), b.col(j), n));

    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return sig[a] > sig[c]; });

    const double cutoff = sig.empty() ? 0.0 : 1e-12 * sig[order[0]];
    SvdFactors f;
    f.sigma.resize(k);
    Matrix u(n, k);
    Matrix w(k, k);
    for (int j = 0; j < k; ++j) {
        const int src = order[j];
        const double s = sig[src] <= cutoff ? 0.0 : sig[src];
        f.sigma[j] = s;
        const double* vs = v.col(src);
        double* wj = w.col(j);
        for (int i = 0; i < k; ++i) wj[i] = vs[i];
        if (s > 0.0) {
            const double* bs = b.col(src);
            double* uj = u.col(j);
            const double inv = 1.0 / sig[src];
            for (int i = 0; i < n; ++i) uj[i] = bs[i] * inv;
        }
    }
    for (int j = 0; j < k; ++j)
        if (f.sigma[j] == 0.0) detail::complete_column(u, j, k);

    f.left = transposed ? std::move(w) : std::move(u);
    f.right = transposed ? std::move(u) : std::move(w);

    for (int j = 0; j < k; ++j) {
        double* lj = f.left.col(j);
        int arg = 0;
        double best = std::fabs(lj[0]);
        for (int i = 1; i < f.left.rows(); ++i) {
            const double a = std::fabs(lj[i]);
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (lj[arg] < 0.0) {
            for (int i = 0; i < f.left.rows(); ++i) lj[i] = -lj[i];
            double* rj = f.right.col(j);
            for (int i = 0; i < f.right.rows(); ++i) rj[i] = -rj[i];
        }
    }
    return f;
}

/// left * diag(sigma) * right^T.
inline Matrix reconstruct(const SvdFactors& f) {
    const int d = f.left.rows();
    const int m = f.right.rows();
    const int j = static_cast<int>(f.sigma.size());
    Matrix out(d, m);
    for (int c = 0; c < m; ++c) {
        double* oc = out.col(c);
        for (int t = 0; t < j; ++t) {
            const double w = f.sigma[t] * f.right(c, t);
            if (w == 0.0) continue;
            const double* lt = f.left.col(t);
            for (int r = 0; r < d; ++r) oc[r] += lt[r] * w;
        }
    }
    return out;
}

inline double soft(double v, double tau) {
    const double a = std::fabs(v) - tau;
    return a <= 0.0 ? 0.0 : (v >= 0.0 ? a : -a);
}

/// argmin_x 1/2||a-x||^2 + tau*||x-b||_1, elementwise: soft(a-b,tau)+b.
inline std::vector<double> soft_threshold(const std::vector<double>& a,
                                          const std::vector<double>& b, double tau) {
    if (a.size() != b.size())
        throw std::invalid_argument("soft_threshold: length mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    if (tau < 0.0) throw std::invalid_argument("soft_threshold: tau must be nonnegative");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = soft(a[i] - b[i], tau) + b[i];
    return out;
}

/// Uniform singular value shrinkage (the NNM prox). Vectors are untouched.
inline SvdFactors svt_shrink(const SvdFactors& f, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("svt_shrink: lambda must be nonnegative");
    SvdFactors out = f;
    for (double& s : out.sigma) s = std::max(s - lambda, 0.0);
    return out;
}

/// Componentwise shrinkage of singular values toward a reference spectrum:
/// soft(obs-ref, lambda)+ref, clamped at zero.
inline std::vector<double> rrc_shrink(const std::vector<double>& obs_sigma,
                                      const std::vector<double>& ref_sigma, double lambda) {
    if (obs_sigma.size() != ref_sigma.size())
        throw std::invalid_argument("rrc_shrink: length mismatch (" +
                                    std::to_string(obs_sigma.size()) + " vs " +
                                    std::to_string(ref_sigma.size()) + ")");
    if (lambda < 0.0) throw std::invalid_argument("rrc_shrink: lambda must be nonnegative");
    std::vector<double> out(obs_sigma.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::max(soft(obs_sigma[i] - ref_sigma[i], lambda) + ref_sigma[i], 0.0);
    return out;
}

}  // namespace rrc
