#pragma once

#include <initializer_list>
#include <optional>
#include <vector>

#include "mfloq/core.hpp"

namespace mfloq {

// Dense complex matrix, row-major. Vectors are n x 1 matrices.
class Mat {
  public:
    Mat() : nr_(0), nc_(0) {}
    Mat(int rows, int cols) : nr_(rows), nc_(cols), a_(static_cast<size_t>(rows) * cols, cplx(0.0)) {
        if (rows < 0 || cols < 0) throw dimension_mismatch("Mat: negative dimension");
    }
    Mat(int rows, int cols, std::initializer_list<cplx> entries) : Mat(rows, cols) {
        if (static_cast<int>(entries.size()) != rows * cols)
            throw dimension_mismatch("Mat: initializer size mismatch");
        std::copy(entries.begin(), entries.end(), a_.begin());
    }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat col_vector(std::initializer_list<cplx> entries) {
        Mat v(static_cast<int>(entries.size()), 1);
        std::copy(entries.begin(), entries.end(), v.a_.begin());
        return v;
    }

    int rows() const { return nr_; }
    int cols() const { return nc_; }
    bool empty() const { return a_.empty(); }
    bool is_square() const { return nr_ == nc_; }
    bool is_vector() const { return nc_ == 1; }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * nc_ + j]; }
    cplx operator()(int i, int j) const { return a_[static_cast<size_t>(i) * nc_ + j]; }
    cplx& operator[](int i) { return a_[static_cast<size_t>(i)]; }
    cplx operator[](int i) const { return a_[static_cast<size_t>(i)]; }

    Mat& operator+=(const Mat& o);
    Mat& operator-=(const Mat& o);
    Mat& operator*=(cplx s);
    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(cplx s, Mat a) { return a *= s; }
    friend Mat operator*(Mat a, cplx s) { return a *= s; }
    friend Mat operator*(const Mat& a, const Mat& b);

    bool all_finite() const {
        for (const cplx& v : a_)
            if (!is_finite(v)) return false;
        return true;
    }

  private:
    int nr_, nc_;
    std::vector<cplx> a_;
};

using Vec = Mat;

// Induced 1-norm: max over columns of the sum of entry moduli.
double one_norm(const Mat& m);

// Inverse by partial-pivot elimination. Throws singular_matrix when a pivot
// modulus drops under 1e-13 * one_norm(m).
Mat inverse(const Mat& m);

// Determinant from the same elimination.
cplx det(const Mat& m);

// Solve m x = b (b may have several columns).
Mat solve(const Mat& m, const Mat& b);

struct SpectralData {
    std::vector<cplx> eigenvalues;  // n entries, repeats allowed
    std::vector<Vec> eigenvectors;  // parallel to eigenvalues, 1-norm normalized
    std::vector<double> residuals;  // ||B v - lambda v||_1 per pair
};

// Eigenvalues via Hessenberg reduction + shifted QR; eigenvectors via inverse
// iteration. n <= 64. Residual invariant: each residual <= eps_spec_factor *
// (1 + ||m||_1) * ||v||_1.
SpectralData eigen(const Mat& m, double eps_spec_factor = 1e-9);

struct JordanDecomposition {
    Mat P;  // invertible
    Mat J;  // block-diagonal Jordan form
    std::vector<int> block_sizes;
    std::vector<cplx> block_eigenvalues;
};

// Jordan decomposition: exact for n <= 2; for n > 2 needs either a verified
// user hint, a matrix already in Jordan form, or cleanly separated eigenvalues.
JordanDecomposition jordan(const Mat& m, const std::optional<JordanDecomposition>& user_hint = std::nullopt,
                           double eps_spec_factor = 1e-9);

// true iff ||AB - BA||_1 <= 1e-12 (1 + ||A||_1 ||B||_1).
bool commute(const Mat& a, const Mat& b);

// Distinct eigenvalues (clustered at tol) with algebraic multiplicities.
std::vector<std::pair<cplx, int>> distinct_eigenvalues(const SpectralData& sd, double tol);

}  // namespace mfloq
