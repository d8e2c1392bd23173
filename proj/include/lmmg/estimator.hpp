#pragma once

#include <vector>

#include <lmmg/problem.hpp>

namespace lmmg {

/// Per-element weight of the robust residual indicator:
///   min(nu^{-1/2}, eps^{-1/2} h)  when nu > 0,
///   eps^{-1/2} h                  when nu = 0.
double indicator_weight(double epsilon, double nu, double h);

/// Whether to split data oscillation out of the interior residual.  With
/// `split`, the interior term uses the elementwise mean of f(., u) and the
/// distance to that mean is reported separately; the default keeps f
/// itself, for which the oscillation term vanishes identically.
enum class Oscillation { off, split };

struct ErrorIndicators {
    std::vector<double> eta_sq; ///< squared indicator per element
    std::vector<double> osc_sq; ///< squared oscillation per element (only for Oscillation::split)
    double total_sq = 0.0;      ///< sum of eta_sq

    double total() const;
};

/// Squared error indicators of the iterate u:
///   eta_T^2 = alpha_T^2 |f(., u) - q u|_T^2
///           + (1/2) eps^{-1/2} alpha_T |jump of eps grad u|_{boundary of T}^2,
/// where the elementwise Laplacian of a P1 function vanishes, jumps are
/// taken across interior edges only, and each interior edge contributes to
/// both adjacent elements.
ErrorIndicators element_indicators(const ProblemOperators& ops, const FeFunction& u,
                                   Oscillation oscillation = Oscillation::off);

/// Minimal set (greedy by descending squared indicator, ties broken toward
/// the lower element id) whose squared indicators sum to at least
/// theta * total_sq.  An all-zero field yields an empty marking.  The
/// returned ids are sorted ascending.
std::vector<int> dorfler_mark(const std::vector<double>& eta_sq, double theta);

} // namespace lmmg
