#pragma once

#include <vector>

namespace lmmg {

using Vector = std::vector<double>;

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

/// y += alpha * x
void axpy(double alpha, const Vector& x, Vector& y);

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Square sparse matrix in compressed sparse row form.  Assembly goes
/// through from_triplets, which sums duplicate entries; all solvers here
/// assume the matrix is symmetric positive definite, so both halves of each
/// off-diagonal pair are stored explicitly.
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets);

    int size() const { return n_; }

    Vector multiply(const Vector& x) const;

    Vector diagonal() const;

    const std::vector<int>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& columns() const { return columns_; }
    const std::vector<double>& values() const { return values_; }

private:
    int n_ = 0;
    std::vector<int> row_offsets_ = {0};
    std::vector<int> columns_;
    std::vector<double> values_;
};

struct CgResult {
    Vector x;
    long iterations = 0;
    double relative_residual = 0.0; ///< |b - Ax|_2 / |b|_2 at exit (0 for b = 0)
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// definite systems.  Stops once |b - Ax|_2 <= rel_tol * |b|_2; throws
/// NonConvergence (carrying the final relative residual and the iteration
/// count) if that does not happen within max_iter iterations.  max_iter < 0
/// selects the default budget of 10 * size.  An optional x0 warm-starts the
/// iteration.
CgResult cg_solve(const SparseMatrix& A,
                  const Vector& b,
                  double rel_tol = 1e-10,
                  long max_iter = -1,
                  const Vector* x0 = nullptr);

} // namespace lmmg
