#include <lmmg/sparse.hpp>

#include <algorithm>
#include <cmath>

#include <lmmg/errors.hpp>

namespace lmmg {

double dot(const Vector& a, const Vector& b)
{
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(const Vector& a)
{
    return std::sqrt(dot(a, a));
}

void axpy(double alpha, const Vector& x, Vector& y)
{
    for (size_t i = 0; i < x.size(); ++i)
        y[i] += alpha * x[i];
}

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> triplets)
{
    if (n < 0)
        throw InvalidInput("matrix dimension must be nonnegative");
    for (const auto& t : triplets)
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw InvalidInput("triplet index out of range");

    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix m;
    m.n_ = n;
    m.row_offsets_.assign(n + 1, 0);
    for (size_t i = 0; i < triplets.size();) {
        size_t j = i + 1;
        double sum = triplets[i].value;
        while (j < triplets.size() && triplets[j].row == triplets[i].row
               && triplets[j].col == triplets[i].col) {
            sum += triplets[j].value;
            ++j;
        }
        m.columns_.push_back(triplets[i].col);
        m.values_.push_back(sum);
        ++m.row_offsets_[triplets[i].row + 1];
        i = j;
    }
    for (int r = 0; r < n; ++r)
        m.row_offsets_[r + 1] += m.row_offsets_[r];
    return m;
}

Vector SparseMatrix::multiply(const Vector& x) const
{
    if (static_cast<int>(x.size()) != n_)
        throw InvalidInput("matrix-vector dimension mismatch");
    Vector y(n_, 0.0);
    for (int r = 0; r < n_; ++r) {
        double s = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            s += values_[k] * x[columns_[k]];
        y[r] = s;
    }
    return y;
}

Vector SparseMatrix::diagonal() const
{
    Vector d(n_, 0.0);
    for (int r = 0; r < n_; ++r)
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
            if (columns_[k] == r)
                d[r] = values_[k];
    return d;
}

CgResult cg_solve(const SparseMatrix& A, const Vector& b, double rel_tol, long max_iter, const Vector* x0)
{
    const int n = A.size();
    if (static_cast<int>(b.size()) != n)
        throw InvalidInput("cg_solve: right-hand side dimension mismatch");
    if (x0 && static_cast<int>(x0->size()) != n)
        throw InvalidInput("cg_solve: initial guess dimension mismatch");
    if (max_iter < 0)
        max_iter = 10L * n;

    CgResult result;
    result.x = x0 ? *x0 : Vector(n, 0.0);

    const double norm_b = norm2(b);
    if (norm_b == 0.0) {
        result.x.assign(n, 0.0);
        return result;
    }

    Vector inv_diag = A.diagonal();
    for (double& d : inv_diag) {
        if (d <= 0.0)
            throw InvalidInput("cg_solve: nonpositive diagonal entry, matrix is not SPD");
        d = 1.0 / d;
    }

    Vector r = A.multiply(result.x);
    for (int i = 0; i < n; ++i)
        r[i] = b[i] - r[i];

    double norm_r = norm2(r);
    if (norm_r <= rel_tol * norm_b) {
        result.relative_residual = norm_r / norm_b;
        return result;
    }

    Vector z(n), p(n);
    for (int i = 0; i < n; ++i)
        p[i] = z[i] = inv_diag[i] * r[i];
    double rho = dot(r, z);

    for (long k = 1; k <= max_iter; ++k) {
        const Vector Ap = A.multiply(p);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0))
            throw NonConvergence("cg_solve: breakdown, matrix is not positive definite",
                                 norm_r / norm_b, k);
        const double alpha = rho / pAp;
        axpy(alpha, p, result.x);
        axpy(-alpha, Ap, r);
        norm_r = norm2(r);
        if (norm_r <= rel_tol * norm_b) {
            result.iterations = k;
            result.relative_residual = norm_r / norm_b;
            return result;
        }
        for (int i = 0; i < n; ++i)
            z[i] = inv_diag[i] * r[i];
        const double rho_next = dot(r, z);
        for (int i = 0; i < n; ++i)
            p[i] = z[i] + (rho_next / rho) * p[i];
        rho = rho_next;
    }

    throw NonConvergence("cg_solve: no convergence within " + std::to_string(max_iter)
                             + " iterations",
                         norm_r / norm_b, max_iter);
}

} // namespace lmmg
