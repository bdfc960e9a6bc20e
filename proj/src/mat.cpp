#include "mfloq/mat.hpp"

#include <algorithm>
#include <cmath>

namespace mfloq {

Mat& Mat::operator+=(const Mat& o) {
    if (nr_ != o.nr_ || nc_ != o.nc_) throw dimension_mismatch("Mat::+=: shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

Mat& Mat::operator-=(const Mat& o) {
    if (nr_ != o.nr_ || nc_ != o.nc_) throw dimension_mismatch("Mat::-=: shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

Mat& Mat::operator*=(cplx s) {
    for (cplx& v : a_) v *= s;
    return *this;
}

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw dimension_mismatch("Mat::*: inner dimension mismatch");
    Mat c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx(0.0)) continue;
            for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

double one_norm(const Mat& m) {
    double best = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
        double s = 0.0;
        for (int i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
        best = std::max(best, s);
    }
    return best;
}

namespace {

// Gauss elimination with partial pivoting on [m | rhs]; returns determinant.
// rhs may be empty (determinant only).
cplx eliminate(Mat m, Mat* rhs, double pivot_floor) {
    const int n = m.rows();
    cplx d = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(m(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                piv = i;
            }
        if (best < pivot_floor) throw singular_matrix("matrix is singular to working precision");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            if (rhs)
                for (int j = 0; j < rhs->cols(); ++j) std::swap((*rhs)(k, j), (*rhs)(piv, j));
            d = -d;
        }
        d *= m(k, k);
        for (int i = k + 1; i < n; ++i) {
            const cplx f = m(i, k) / m(k, k);
            if (f == cplx(0.0)) continue;
            for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
            if (rhs)
                for (int j = 0; j < rhs->cols(); ++j) (*rhs)(i, j) -= f * (*rhs)(k, j);
        }
    }
    if (rhs) {
        for (int k = n - 1; k >= 0; --k)
            for (int j = 0; j < rhs->cols(); ++j) {
                cplx s = (*rhs)(k, j);
                for (int i = k + 1; i < n; ++i) s -= m(k, i) * (*rhs)(i, j);
                (*rhs)(k, j) = s / m(k, k);
            }
    }
    return d;
}

double pivot_floor_for(const Mat& m) {
    const double nrm = one_norm(m);
    return 1e-13 * (nrm > 0.0 ? nrm : 1.0);
}

}  // namespace

Mat solve(const Mat& m, const Mat& b) {
    if (!m.is_square()) throw dimension_mismatch("solve: matrix not square");
    if (m.rows() != b.rows()) throw dimension_mismatch("solve: rhs rows mismatch");
    Mat rhs = b;
    eliminate(m, &rhs, pivot_floor_for(m));
    return rhs;
}

Mat inverse(const Mat& m) {
    if (!m.is_square()) throw dimension_mismatch("inverse: matrix not square");
    return solve(m, Mat::identity(m.rows()));
}

cplx det(const Mat& m) {
    if (!m.is_square()) throw dimension_mismatch("det: matrix not square");
    try {
        return eliminate(m, nullptr, 1e-300);
    } catch (const singular_matrix&) {
        return cplx(0.0);
    }
}

// ---------------------------------------------------------------------------
// Eigenvalues: Hessenberg + explicit single-shift QR with Givens rotations
// ---------------------------------------------------------------------------

namespace {

void hessenberg(Mat& h) {
    const int n = h.rows();
    for (int k = 0; k + 2 < n; ++k) {
        // Householder vector for column k, rows k+1..n-1.
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale += std::abs(h(i, k));
        if (scale == 0.0) continue;
        std::vector<cplx> v(n, 0.0);
        double nrm2 = 0.0;
        for (int i = k + 1; i < n; ++i) {
            v[i] = h(i, k) / scale;
            nrm2 += std::norm(v[i]);
        }
        double nrm = std::sqrt(nrm2);
        if (nrm == 0.0) continue;
        cplx x0 = v[k + 1];
        cplx phase = (x0 == cplx(0.0)) ? cplx(1.0) : x0 / std::abs(x0);
        cplx alpha = -phase * nrm;
        v[k + 1] -= alpha;
        double vv = 0.0;
        for (int i = k + 1; i < n; ++i) vv += std::norm(v[i]);
        if (vv == 0.0) continue;
        // H = I - 2 v v^* / (v^* v); apply from left and right.
        for (int j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (int i = k + 1; i < n; ++i) s += std::conj(v[i]) * h(i, j);
            s *= 2.0 / vv;
            for (int i = k + 1; i < n; ++i) h(i, j) -= v[i] * s;
        }
        for (int i = 0; i < n; ++i) {
            cplx s = 0.0;
            for (int j = k + 1; j < n; ++j) s += h(i, j) * v[j];
            s *= 2.0 / vv;
            for (int j = k + 1; j < n; ++j) h(i, j) -= s * std::conj(v[j]);
        }
        for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

// Eigenvalue of [[a,b],[c,d]] closest to d (Wilkinson shift).
cplx wilkinson_shift(cplx a, cplx b, cplx c, cplx d) {
    const cplx tr = a + d;
    const cplx dt = a * d - b * c;
    const cplx disc = std::sqrt(tr * tr - 4.0 * dt);
    const cplx l1 = 0.5 * (tr + disc);
    const cplx l2 = 0.5 * (tr - disc);
    return (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
}

std::vector<cplx> qr_eigenvalues(Mat h, int max_sweeps) {
    const int n = h.rows();
    std::vector<cplx> eig(n);
    int hi = n - 1;
    int sweeps = 0;
    int stall = 0;
    while (hi >= 0) {
        if (hi == 0) {
            eig[0] = h(0, 0);
            break;
        }
        // Deflate converged subdiagonals.
        int lo = hi;
        while (lo > 0) {
            const double sub = std::abs(h(lo, lo - 1));
            const double ref = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (sub <= 1e-15 * (ref > 0.0 ? ref : 1.0)) {
                h(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig[hi] = h(hi, hi);
            --hi;
            stall = 0;
            continue;
        }
        if (++sweeps > max_sweeps) throw convergence_error("eigen: QR iteration exceeded sweep cap");
        cplx shift = wilkinson_shift(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
        if (++stall % 12 == 0) shift = cplx(std::abs(h(hi, hi - 1)), std::abs(h(hi, hi)));  // exceptional
        // Explicit shifted QR on the active window [lo..hi] via Givens.
        for (int i = lo; i <= hi; ++i) h(i, i) -= shift;
        std::vector<std::pair<cplx, cplx>> rot(hi);  // (c, s) per row pair
        for (int i = lo; i < hi; ++i) {
            cplx x = h(i, i), y = h(i + 1, i);
            double r = std::sqrt(std::norm(x) + std::norm(y));
            cplx c = 1.0, s = 0.0;
            if (r > 0.0) {
                c = x / r;
                s = y / r;
            }
            rot[i] = {c, s};
            for (int j = i; j <= hi; ++j) {
                const cplx t1 = h(i, j), t2 = h(i + 1, j);
                h(i, j) = std::conj(c) * t1 + std::conj(s) * t2;
                h(i + 1, j) = -s * t1 + c * t2;
            }
        }
        for (int i = lo; i < hi; ++i) {
            const cplx c = rot[i].first, s = rot[i].second;
            for (int j = lo; j <= std::min(i + 1, hi); ++j) {
                const cplx t1 = h(j, i), t2 = h(j, i + 1);
                h(j, i) = t1 * c + t2 * s;
                h(j, i + 1) = -t1 * std::conj(s) + t2 * std::conj(c);
            }
        }
        for (int i = lo; i <= hi; ++i) h(i, i) += shift;
    }
    return eig;
}

}  // namespace

namespace {

// Null vectors of m by row-echelon reduction; columns without a usable pivot
// become free variables.
std::vector<Vec> null_vectors(Mat m, double pivot_tol) {
    const int n = m.rows();
    std::vector<int> pivot_row_of_col(n, -1);
    int row = 0;
    for (int col = 0; col < n && row < n; ++col) {
        int piv = -1;
        double best = pivot_tol;
        for (int i = row; i < n; ++i)
            if (std::abs(m(i, col)) > best) {
                best = std::abs(m(i, col));
                piv = i;
            }
        if (piv < 0) continue;
        if (piv != row)
            for (int j = 0; j < n; ++j) std::swap(m(row, j), m(piv, j));
        for (int i = row + 1; i < n; ++i) {
            const cplx f = m(i, col) / m(row, col);
            if (f == cplx(0.0)) continue;
            for (int j = col; j < n; ++j) m(i, j) -= f * m(row, j);
        }
        pivot_row_of_col[col] = row;
        ++row;
    }
    std::vector<Vec> out;
    for (int free_col = 0; free_col < n; ++free_col) {
        if (pivot_row_of_col[free_col] >= 0) continue;
        Vec v(n, 1);
        v[free_col] = 1.0;
        for (int col = free_col - 1; col >= 0; --col) {
            const int r = pivot_row_of_col[col];
            if (r < 0) continue;
            cplx s = 0.0;
            for (int j = col + 1; j < n; ++j) s += m(r, j) * v[j];
            v[col] = -s / m(r, col);
        }
        out.push_back(std::move(v));
    }
    return out;
}

// Deterministic phase/scale: 1-norm one, largest component real positive.
void normalize_direction(Vec& v) {
    const double s = one_norm(v);
    if (s == 0.0) return;
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < v.rows(); ++i)
        if (std::abs(v[i]) > best + 1e-14) {
            best = std::abs(v[i]);
            arg = i;
        }
    const cplx phase = v[arg] / std::abs(v[arg]);
    v *= (1.0 / s) / phase;
}

}  // namespace

SpectralData eigen(const Mat& m, double eps_spec_factor) {
    if (!m.is_square()) throw dimension_mismatch("eigen: matrix not square");
    const int n = m.rows();
    if (n > 64) throw domain_error("eigen: n > 64 unsupported");
    if (!m.all_finite()) throw overflow_error("eigen: non-finite entries");

    SpectralData sd;
    if (n == 1) {
        sd.eigenvalues = {m(0, 0)};
        sd.eigenvectors = {Mat::identity(1)};
        sd.residuals = {0.0};
        return sd;
    }
    Mat h = m;
    hessenberg(h);
    sd.eigenvalues = qr_eigenvalues(h, 500 * n);

    const double nrm = one_norm(m);
    const double tol = eps_spec_factor * (1.0 + nrm);

    // Inverse iteration per eigenvalue; repeated eigenvalues get starts
    // orthogonalized against previously found vectors of the same cluster
    // (recovers full eigenspaces; defective blocks fall back to the single
    // converged direction).
    for (size_t idx = 0; idx < sd.eigenvalues.size(); ++idx) {
        const cplx lambda = sd.eigenvalues[idx];
        std::vector<int> same;
        for (size_t j = 0; j < idx; ++j)
            if (std::abs(sd.eigenvalues[j] - lambda) <= 10.0 * tol) same.push_back(static_cast<int>(j));

        auto residual_norm = [&](const Vec& x) {
            Vec r = m * x;
            for (int i = 0; i < n; ++i) r[i] -= lambda * x[i];
            return one_norm(r);
        };

        // Exact (to tolerance) kernel directions first: keeps eigenvectors of
        // matrices that are already diagonal or Jordan free of iteration noise.
        {
            Mat shifted = m;
            for (int i = 0; i < n; ++i) shifted(i, i) -= lambda;
            // Defective eigenvalues carry sqrt(eps)-level error, so the pivot
            // cut sits well above that; the residual test filters false kernels.
            std::vector<Vec> nullv = null_vectors(shifted, 1e-7 * (1.0 + nrm));
            const size_t want = same.size();  // how many kernel directions are spoken for
            if (nullv.size() > want) {
                Vec v = nullv[want];
                normalize_direction(v);
                const double res = residual_norm(v);
                if (res <= tol * one_norm(v)) {
                    sd.eigenvectors.push_back(v);
                    sd.residuals.push_back(res);
                    continue;
                }
            } else if (!nullv.empty()) {
                Vec v = nullv.back();
                normalize_direction(v);
                const double res = residual_norm(v);
                if (res <= tol * one_norm(v)) {
                    sd.eigenvectors.push_back(v);
                    sd.residuals.push_back(res);
                    continue;
                }
            }
        }

        Vec best(n, 1);
        double best_res = -1.0;
        for (int attempt = 0; attempt < 4 + static_cast<int>(same.size()); ++attempt) {
            Vec b(n, 1);
            for (int i = 0; i < n; ++i)
                b[i] = cplx(std::cos(0.7 * (i + 1) * (attempt + 1)), std::sin(1.3 * (i + 1) + attempt));
            // Bias away from already-found vectors of the same cluster.
            for (int j : same) {
                cplx ip = 0.0;
                double nn = 0.0;
                for (int i = 0; i < n; ++i) {
                    ip += std::conj(sd.eigenvectors[j][i]) * b[i];
                    nn += std::norm(sd.eigenvectors[j][i]);
                }
                if (nn > 0.0)
                    for (int i = 0; i < n; ++i) b[i] -= ip / nn * sd.eigenvectors[j][i];
            }
            Mat shifted = m;
            double bump = tol * (attempt + 1);
            for (int i = 0; i < n; ++i) shifted(i, i) -= lambda + cplx(bump, 0.5 * bump);
            Vec v = b;
            bool ok = true;
            for (int it = 0; it < 3; ++it) {
                try {
                    v = solve(shifted, v);
                } catch (const singular_matrix&) {
                    ok = false;
                    break;
                }
                double s = one_norm(v);
                if (s == 0.0 || !v.all_finite()) {
                    ok = false;
                    break;
                }
                v *= cplx(1.0 / s);
            }
            if (!ok) continue;
            // Orthogonalize the result against same-cluster vectors; if that
            // destroys the eigen-residual the eigenvalue is defective and we
            // keep the raw direction.
            Vec w = v;
            for (int j : same) {
                cplx ip = 0.0;
                double nn = 0.0;
                for (int i = 0; i < n; ++i) {
                    ip += std::conj(sd.eigenvectors[j][i]) * w[i];
                    nn += std::norm(sd.eigenvectors[j][i]);
                }
                if (nn > 0.0)
                    for (int i = 0; i < n; ++i) w[i] -= ip / nn * sd.eigenvectors[j][i];
            }
            const double wn = one_norm(w);
            auto residual_of = [&](const Vec& x) {
                Vec r = m * x;
                for (int i = 0; i < n; ++i) r[i] -= lambda * x[i];
                return one_norm(r);
            };
            if (wn > 1e-4) {
                w *= cplx(1.0 / wn);
                if (residual_of(w) <= tol * one_norm(w)) {
                    best = w;
                    best_res = residual_of(w);
                    break;
                }
            }
            const double rv = residual_of(v);
            if (best_res < 0.0 || rv < best_res) {
                best = v;
                best_res = rv;
            }
            if (rv <= tol) break;
        }
        if (best_res < 0.0) throw convergence_error("eigen: inverse iteration failed");
        normalize_direction(best);
        sd.eigenvectors.push_back(best);
        sd.residuals.push_back(residual_norm(best));
    }
    return sd;
}

std::vector<std::pair<cplx, int>> distinct_eigenvalues(const SpectralData& sd, double tol) {
    std::vector<std::pair<cplx, int>> out;
    for (cplx l : sd.eigenvalues) {
        bool found = false;
        for (auto& [v, m] : out)
            if (std::abs(v - l) <= tol) {
                v = (v * double(m) + l) / double(m + 1);
                ++m;
                found = true;
                break;
            }
        if (!found) out.emplace_back(l, 1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Jordan structure
// ---------------------------------------------------------------------------

namespace {

bool verify_jordan(const Mat& m, const JordanDecomposition& jd, double eps_spec_factor) {
    if (!jd.P.is_square() || !jd.J.is_square() || jd.P.rows() != m.rows() || jd.J.rows() != m.rows()) return false;
    const double tol = eps_spec_factor * (1.0 + one_norm(m)) * std::max(one_norm(jd.P), 1.0);
    Mat r = m * jd.P - jd.P * jd.J;
    return one_norm(r) <= std::max(tol, 1e-300);
}

// Checks that J literally has Jordan structure: block diagonal, ones on the
// first superdiagonal inside blocks, zeros elsewhere, equal eigenvalue along
// each chain.
bool is_exact_jordan_pattern(const Mat& j, std::vector<int>* sizes, std::vector<cplx>* eigs, double tol) {
    const int n = j.rows();
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            if (i == k || k == i + 1) continue;
            if (std::abs(j(i, k)) > tol) return false;
        }
    for (int i = 0; i + 1 < n; ++i) {
        const cplx s = j(i, i + 1);
        const bool one = std::abs(s - 1.0) <= tol;
        const bool zero = std::abs(s) <= tol;
        if (!one && !zero) return false;
        if (one && std::abs(j(i, i) - j(i + 1, i + 1)) > tol) return false;
    }
    if (sizes && eigs) {
        sizes->clear();
        eigs->clear();
        int start = 0;
        for (int i = 0; i < n; ++i) {
            const bool chain = (i + 1 < n) && std::abs(j(i, i + 1) - 1.0) <= tol;
            if (!chain) {
                sizes->push_back(i - start + 1);
                eigs->push_back(j(start, start));
                start = i + 1;
            }
        }
    }
    return true;
}

Mat rounded_jordan(const Mat& m, double tol) {
    const int n = m.rows();
    Mat j(n, n);
    for (int i = 0; i < n; ++i) {
        j(i, i) = m(i, i);
        if (i + 1 < n) j(i, i + 1) = (std::abs(m(i, i + 1) - 1.0) <= tol) ? cplx(1.0) : cplx(0.0);
    }
    return j;
}

JordanDecomposition jordan_2x2(const Mat& m, double eps_spec_factor) {
    const double nrm = one_norm(m);
    const double tol = eps_spec_factor * (1.0 + nrm);
    const cplx a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
    const cplx tr = a + d;
    const cplx disc = std::sqrt(tr * tr - 4.0 * (a * d - b * c));
    cplx l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);

    JordanDecomposition jd;
    const double sep = std::abs(l1 - l2);
    if (sep > 1e3 * tol) {
        // Distinct eigenvalues: columns of P are eigenvectors.
        auto eigvec = [&](cplx l) {
            // (m - l I) v = 0; take the larger row as constraint.
            const cplx r1a = a - l, r1b = b;
            const cplx r2a = c, r2b = d - l;
            Vec v(2, 1);
            if (std::abs(r1a) + std::abs(r1b) >= std::abs(r2a) + std::abs(r2b)) {
                if (std::abs(r1a) >= std::abs(r1b)) {
                    v[0] = -r1b / r1a;
                    v[1] = 1.0;
                } else {
                    v[0] = 1.0;
                    v[1] = -r1a / r1b;
                }
            } else {
                if (std::abs(r2a) >= std::abs(r2b)) {
                    v[0] = -r2b / r2a;
                    v[1] = 1.0;
                } else {
                    v[0] = 1.0;
                    v[1] = -r2a / r2b;
                }
            }
            double s = one_norm(v);
            v *= cplx(1.0 / s);
            return v;
        };
        Vec v1 = eigvec(l1), v2 = eigvec(l2);
        jd.P = Mat(2, 2, {v1[0], v2[0], v1[1], v2[1]});
        jd.J = Mat(2, 2, {l1, 0.0, 0.0, l2});
        jd.block_sizes = {1, 1};
        jd.block_eigenvalues = {l1, l2};
        return jd;
    }
    // Clustered eigenvalues: either scalar-like or a defective 2-block.
    const cplx l = 0.5 * (l1 + l2);
    Mat nmat = m;
    nmat(0, 0) -= l;
    nmat(1, 1) -= l;
    if (one_norm(nmat) <= 1e3 * tol) {
        jd.P = Mat::identity(2);
        jd.J = Mat(2, 2, {l, 0.0, 0.0, l});
        jd.block_sizes = {1, 1};
        jd.block_eigenvalues = {l, l};
        return jd;
    }
    // Defective: N = m - l I is (numerically) nilpotent of rank 1. Pick w with
    // N w != 0, then columns (N w, w) give m P = P [[l,1],[0,l]].
    Vec w(2, 1);
    Vec nw(2, 1);
    for (int pick = 0; pick < 2; ++pick) {
        w[0] = pick == 0 ? 1.0 : 0.0;
        w[1] = pick == 0 ? 0.0 : 1.0;
        nw = nmat * w;
        if (one_norm(nw) > tol) break;
    }
    const double s = one_norm(nw);
    if (s == 0.0) throw ill_conditioned("jordan: cannot resolve 2x2 structure");
    w *= cplx(1.0 / s);
    nw *= cplx(1.0 / s);
    jd.P = Mat(2, 2, {nw[0], w[0], nw[1], w[1]});
    jd.J = Mat(2, 2, {l, 1.0, 0.0, l});
    jd.block_sizes = {2};
    jd.block_eigenvalues = {l};
    return jd;
}

}  // namespace

JordanDecomposition jordan(const Mat& m, const std::optional<JordanDecomposition>& user_hint,
                           double eps_spec_factor) {
    if (!m.is_square()) throw dimension_mismatch("jordan: matrix not square");
    const int n = m.rows();
    const double nrm = one_norm(m);
    const double tol = eps_spec_factor * (1.0 + nrm);

    if (user_hint) {
        JordanDecomposition jd = *user_hint;
        std::vector<int> sizes;
        std::vector<cplx> eigs;
        if (!is_exact_jordan_pattern(jd.J, &sizes, &eigs, tol))
            throw hint_rejected("jordan: hint J lacks Jordan structure");
        if (!verify_jordan(m, jd, eps_spec_factor)) throw hint_rejected("jordan: hint fails ||BP - PJ|| tolerance");
        try {
            (void)inverse(jd.P);
        } catch (const singular_matrix&) {
            throw hint_rejected("jordan: hint P is singular");
        }
        jd.block_sizes = sizes;
        jd.block_eigenvalues = eigs;
        return jd;
    }

    // Already in Jordan form (covers diagonal matrices with repeated spectrum).
    {
        std::vector<int> sizes;
        std::vector<cplx> eigs;
        if (is_exact_jordan_pattern(m, &sizes, &eigs, tol)) {
            JordanDecomposition jd;
            jd.P = Mat::identity(n);
            jd.J = rounded_jordan(m, tol);
            jd.block_sizes = sizes;
            jd.block_eigenvalues = eigs;
            return jd;
        }
    }

    if (n == 1) {
        JordanDecomposition jd;
        jd.P = Mat::identity(1);
        jd.J = m;
        jd.block_sizes = {1};
        jd.block_eigenvalues = {m(0, 0)};
        return jd;
    }
    if (n == 2) {
        JordanDecomposition jd = jordan_2x2(m, eps_spec_factor);
        if (!verify_jordan(m, jd, std::max(eps_spec_factor, 1e-8)))
            throw ill_conditioned("jordan: 2x2 reconstruction failed tolerance");
        return jd;
    }

    // n > 2: require clean separation, then the matrix is diagonalizable.
    SpectralData sd = eigen(m, eps_spec_factor);
    const double sep_tol = 1e-6 * (1.0 + nrm);
    for (size_t i = 0; i < sd.eigenvalues.size(); ++i)
        for (size_t j = i + 1; j < sd.eigenvalues.size(); ++j)
            if (std::abs(sd.eigenvalues[i] - sd.eigenvalues[j]) <= sep_tol)
                throw ill_conditioned(
                    "jordan: clustered eigenvalues for n > 2; supply a jordan hint to resolve the structure");
    JordanDecomposition jd;
    jd.P = Mat(n, n);
    jd.J = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        jd.J(j, j) = sd.eigenvalues[j];
        for (int i = 0; i < n; ++i) jd.P(i, j) = sd.eigenvectors[j][i];
        jd.block_sizes.push_back(1);
        jd.block_eigenvalues.push_back(sd.eigenvalues[j]);
    }
    if (!verify_jordan(m, jd, std::max(eps_spec_factor, 1e-8)))
        throw ill_conditioned("jordan: eigenvector matrix failed reconstruction tolerance");
    return jd;
}

bool commute(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || !a.is_square())
        throw dimension_mismatch("commute: dimension mismatch");
    const Mat c = a * b - b * a;
    return one_norm(c) <= 1e-12 * (1.0 + one_norm(a) * one_norm(b));
}

}  // namespace mfloq
