#pragma once

#include "discwalk/graph.hpp"
#include "discwalk/linalg.hpp"

#include <string>
#include <vector>

namespace discwalk {

enum class ReportKind { Spectral, Standard, Uc, Sv, Sketch, Resistance };

std::string to_string(ReportKind kind);

struct ApproxReport {
  ReportKind kind = ReportKind::Spectral;
  double measured_eps = 0;
  bool kernel_ok = true;
  double degree_max_dev = 0;
  Index support_size = 0;
  double target = 0;
  bool pass = false;  // measured_eps <= target, kernel_ok, degree_max_dev <= 1e-6
};

/// JSON object with fields in a fixed order.
std::string report_json(const ApproxReport& r);

/// ||E^+/2 (A - At) F^+/2||_op plus the kernel inclusions
/// ker(E) in ker((A - At)^T) and ker(F) in ker(A - At).
ApproxReport check_matrix_approx(const Matrix& A, const Matrix& At, const SymMatrix& E, const SymMatrix& F,
                                 double target);

/// Undirected: ||L^+/2 (L - L^) L^+/2||.
ApproxReport check_spectral(const Graph& g, const Graph& h, double target);
/// Error matrices E = F = D - (A + A^T)/2 with D the mean of row and column sums.
ApproxReport check_standard(const Graph& g, const Graph& h, double target);
/// Undirected: standard approximation of both A and -A (error matrices L and U).
ApproxReport check_uc_undirected(const Graph& g, const Graph& h, double target);
/// Directed graphs use D_out - A D_in^+ A^T and D_in - A^T D_out^+ A;
/// undirected ones D - A D^+ A.
ApproxReport check_sv(const Graph& g, const Graph& h, double target);
/// Worst |z^T L^ z / z^T L z - 1| over z in K.
ApproxReport check_sketch(const Graph& g, const Graph& h, const std::vector<Vector>& K, double target);
/// Worst effective-resistance ratio error over all pairs.
ApproxReport check_resistance(const Graph& g, const Graph& h, double target);

/// max over connected pairs i < j of g of |R_h(i,j) / R_g(i,j) - 1|, per component.
double effective_resistance_report(const Graph& g, const Graph& h);
/// b_ij^T L^+ b_ij
double effective_resistance(const Graph& g, Index i, Index j);

/// Largest weighted-degree deviation (out and in degrees for directed graphs).
double degree_deviation(const Graph& g, const Graph& h);

struct BruteForceResult {
  Vector x;
  double norm = 0;
};
/// Minimum of ||sum x_i A_i||_op over full colorings with x_0 = +1, m <= 20;
/// ties go to the lexicographically first coloring (+1 before -1).
BruteForceResult brute_force_min_discrepancy(const std::vector<SymMatrix>& family);

}  // namespace discwalk
