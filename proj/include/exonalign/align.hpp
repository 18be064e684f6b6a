#pragma once

// Affine-gap pairwise alignment kernels (Gotoh): a global aligner used for
// block scoring and a semi-global aligner with free end gaps in both
// sequences. A gap run of length L costs gap_open + L * gap_extend.
//
// Tie-break order is fixed for determinism: diagonal, then up (gap in the
// second sequence), then left (gap in the first sequence).

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "exonalign/common.hpp"
#include "exonalign/scoring.hpp"

namespace exonalign {

// A gapped alignment of two segments: equal-length rows over
// {A,C,G,T,N,'-'}. Stripping gaps from the rows reproduces the two segments.
struct PairwiseAlignmentDetail {
    std::string row1;
    std::string row2;

    int columns() const { return static_cast<int>(row1.size()); }

    int matches() const
    {
        int n = 0;
        for (size_t i = 0; i < row1.size(); ++i)
            if (row1[i] != '-' && row2[i] != '-' && bases_match(row1[i], row2[i])) ++n;
        return n;
    }

    int gap_columns() const
    {
        int n = 0;
        for (size_t i = 0; i < row1.size(); ++i)
            if (row1[i] == '-' || row2[i] == '-') ++n;
        return n;
    }

    std::string ungapped1() const
    {
        std::string s;
        for (char c : row1)
            if (c != '-') s.push_back(c);
        return s;
    }
    std::string ungapped2() const
    {
        std::string s;
        for (char c : row2)
            if (c != '-') s.push_back(c);
        return s;
    }
};

// Matched columns over total alignment columns; gap columns count in the
// denominator and N never matches.
inline double block_identity(const PairwiseAlignmentDetail& d)
{
    int cols = d.columns();
    if (cols == 0) return 0.0;
    return static_cast<double>(d.matches()) / cols;
}

struct AlignmentResult {
    int score = 0;
    PairwiseAlignmentDetail detail;
};

namespace detail_dp {

constexpr int kNegInf = std::numeric_limits<int>::min() / 4;

enum State : unsigned char { M = 0, X = 1, Y = 2 }; // X: consume s1, Y: consume s2
enum Origin : unsigned char { FROM_M = 0, FROM_X = 1, FROM_Y = 2, START = 3 };

// Picks the best of (m, x, y) with the fixed preference M > X > Y.
inline State best_state(int m, int x, int y)
{
    if (m >= x && m >= y) return M;
    if (x >= y) return X;
    return Y;
}

struct Matrices {
    int rows = 0, cols = 0;
    std::vector<int> score[3];
    std::vector<Origin> from[3];

    Matrices(int m, int n) : rows(m + 1), cols(n + 1)
    {
        for (int s = 0; s < 3; ++s) {
            score[s].assign(static_cast<size_t>(rows) * cols, kNegInf);
            from[s].assign(static_cast<size_t>(rows) * cols, START);
        }
    }
    int& at(int s, int i, int j) { return score[s][static_cast<size_t>(i) * cols + j]; }
    Origin& tb(int s, int i, int j) { return from[s][static_cast<size_t>(i) * cols + j]; }
};

inline void fill_interior(Matrices& mat, const std::string& s1, const std::string& s2,
                          const ScoringScheme& sc)
{
    const int m = static_cast<int>(s1.size());
    const int n = static_cast<int>(s2.size());
    const int go = sc.gap_open + sc.gap_extend; // opening a run costs open + first extend
    const int ge = sc.gap_extend;
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= n; ++j) {
            int sub = bases_match(s1[static_cast<size_t>(i - 1)], s2[static_cast<size_t>(j - 1)])
                          ? sc.match
                          : sc.mismatch;
            // M: diagonal from any state
            {
                int vm = mat.at(M, i - 1, j - 1);
                int vx = mat.at(X, i - 1, j - 1);
                int vy = mat.at(Y, i - 1, j - 1);
                State b = best_state(vm, vx, vy);
                int base = b == M ? vm : b == X ? vx : vy;
                if (base > kNegInf) {
                    mat.at(M, i, j) = base + sub;
                    mat.tb(M, i, j) = static_cast<Origin>(b);
                }
            }
            // X: consume s1 (gap in s2's row)
            {
                int vm = mat.at(M, i - 1, j) + go;
                int vx = mat.at(X, i - 1, j) + ge;
                int vy = mat.at(Y, i - 1, j) + go;
                if (mat.at(M, i - 1, j) <= kNegInf) vm = kNegInf;
                if (mat.at(X, i - 1, j) <= kNegInf) vx = kNegInf;
                if (mat.at(Y, i - 1, j) <= kNegInf) vy = kNegInf;
                State b = best_state(vm, vx, vy);
                int v = b == M ? vm : b == X ? vx : vy;
                if (v > kNegInf) {
                    mat.at(X, i, j) = v;
                    mat.tb(X, i, j) = static_cast<Origin>(b);
                }
            }
            // Y: consume s2 (gap in s1's row)
            {
                int vm = mat.at(M, i, j - 1) + go;
                int vx = mat.at(X, i, j - 1) + go;
                int vy = mat.at(Y, i, j - 1) + ge;
                if (mat.at(M, i, j - 1) <= kNegInf) vm = kNegInf;
                if (mat.at(X, i, j - 1) <= kNegInf) vx = kNegInf;
                if (mat.at(Y, i, j - 1) <= kNegInf) vy = kNegInf;
                State b = best_state(vm, vx, vy);
                int v = b == M ? vm : b == X ? vx : vy;
                if (v > kNegInf) {
                    mat.at(Y, i, j) = v;
                    mat.tb(Y, i, j) = static_cast<Origin>(b);
                }
            }
        }
    }
}

// Walks traceback from (i, j, s) until a START cell, prepending columns.
inline void traceback(Matrices& mat, const std::string& s1, const std::string& s2, int i, int j,
                      State s, std::string& r1, std::string& r2)
{
    std::string t1, t2;
    while (true) {
        Origin o = mat.tb(s, i, j);
        if (s == M) {
            if (i == 0 && j == 0) break;
            t1.push_back(s1[static_cast<size_t>(i - 1)]);
            t2.push_back(s2[static_cast<size_t>(j - 1)]);
            --i;
            --j;
        } else if (s == X) {
            if (o == START) {
                // free leading run: the whole s1 prefix against gaps
                for (int p = i; p >= 1; --p) {
                    t1.push_back(s1[static_cast<size_t>(p - 1)]);
                    t2.push_back('-');
                }
                i = 0;
                break;
            }
            t1.push_back(s1[static_cast<size_t>(i - 1)]);
            t2.push_back('-');
            --i;
        } else {
            if (o == START) {
                for (int p = j; p >= 1; --p) {
                    t1.push_back('-');
                    t2.push_back(s2[static_cast<size_t>(p - 1)]);
                }
                j = 0;
                break;
            }
            t1.push_back('-');
            t2.push_back(s2[static_cast<size_t>(j - 1)]);
            --j;
        }
        if (o == START) break;
        s = static_cast<State>(o);
    }
    r1.assign(t1.rbegin(), t1.rend());
    r2.assign(t2.rbegin(), t2.rend());
}

} // namespace detail_dp

// Optimal global alignment (both sequences fully aligned, end gaps
// penalized). Handles empty inputs: aligning against the empty sequence
// costs one gap run over the whole segment.
inline AlignmentResult global_align(const std::string& s1, const std::string& s2,
                                    const ScoringScheme& sc)
{
    using namespace detail_dp;
    const int m = static_cast<int>(s1.size());
    const int n = static_cast<int>(s2.size());
    AlignmentResult res;
    if (m == 0 && n == 0) return res;
    if (m == 0) {
        res.score = sc.gap_run(n);
        res.detail.row1.assign(static_cast<size_t>(n), '-');
        res.detail.row2 = s2;
        return res;
    }
    if (n == 0) {
        res.score = sc.gap_run(m);
        res.detail.row1 = s1;
        res.detail.row2.assign(static_cast<size_t>(m), '-');
        return res;
    }

    Matrices mat(m, n);
    mat.at(M, 0, 0) = 0;
    for (int i = 1; i <= m; ++i) {
        mat.at(X, i, 0) = sc.gap_run(i);
        mat.tb(X, i, 0) = i == 1 ? FROM_M : FROM_X;
    }
    for (int j = 1; j <= n; ++j) {
        mat.at(Y, 0, j) = sc.gap_run(j);
        mat.tb(Y, 0, j) = j == 1 ? FROM_M : FROM_Y;
    }
    fill_interior(mat, s1, s2, sc);

    int vm = mat.at(M, m, n), vx = mat.at(X, m, n), vy = mat.at(Y, m, n);
    State b = best_state(vm, vx, vy);
    res.score = b == M ? vm : b == X ? vx : vy;
    traceback(mat, s1, s2, m, n, b, res.detail.row1, res.detail.row2);
    return res;
}

// Optimal semi-global alignment: gap runs touching either end of either
// sequence are free. Both sequences appear in full in the rows.
inline AlignmentResult semiglobal_align(const std::string& s1, const std::string& s2,
                                        const ScoringScheme& sc)
{
    using namespace detail_dp;
    const int m = static_cast<int>(s1.size());
    const int n = static_cast<int>(s2.size());
    AlignmentResult res;
    if (m == 0 || n == 0) {
        res.score = 0;
        res.detail.row1 = s1 + std::string(static_cast<size_t>(n), '-');
        res.detail.row2 = std::string(static_cast<size_t>(m), '-') + s2;
        return res;
    }

    Matrices mat(m, n);
    mat.at(M, 0, 0) = 0;
    for (int i = 1; i <= m; ++i) mat.at(X, i, 0) = 0; // free leading gap, START marked
    for (int j = 1; j <= n; ++j) mat.at(Y, 0, j) = 0;
    fill_interior(mat, s1, s2, sc);

    // Free trailing gaps: best over the last column and the last row,
    // scanned in a fixed order so ties resolve deterministically.
    int best = kNegInf;
    int bi = m, bj = n;
    State bs = M;
    auto consider = [&](int i, int j) {
        int vm = mat.at(M, i, j), vx = mat.at(X, i, j), vy = mat.at(Y, i, j);
        State b = best_state(vm, vx, vy);
        int v = b == M ? vm : b == X ? vx : vy;
        if (v > best) {
            best = v;
            bi = i;
            bj = j;
            bs = b;
        }
    };
    for (int i = m; i >= 0; --i) consider(i, n);
    for (int j = n - 1; j >= 0; --j) consider(m, j);

    res.score = best;
    std::string core1, core2;
    traceback(mat, s1, s2, bi, bj, bs, core1, core2);
    // pad the free trailing run
    std::string tail1, tail2;
    for (int p = bi + 1; p <= m; ++p) {
        tail1.push_back(s1[static_cast<size_t>(p - 1)]);
        tail2.push_back('-');
    }
    for (int p = bj + 1; p <= n; ++p) {
        tail1.push_back('-');
        tail2.push_back(s2[static_cast<size_t>(p - 1)]);
    }
    res.detail.row1 = core1 + tail1;
    res.detail.row2 = core2 + tail2;
    return res;
}

} // namespace exonalign
