#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metastab/landscape.hpp"
#include "metastab/smooth_map.hpp"

namespace metastab::op {

struct OperatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The data (f, A0, b0) of a drift-diffusion operator with Gibbs state
/// e^{-f/h}: second-order part -h div(A0 h grad .), transport part driven by
/// b0, and zeroth-order part c = c0 + h c1 with c0 = <A0 grad f, grad f>
/// forced by the Gibbs condition.
struct OperatorSpec {
    int d = 0;
    SmoothMap f;
    SmoothMap A0;
    SmoothMap b0;
    std::optional<SmoothMap> user_c0;  // checked against the derived c0 when present

    double c0(const Eigen::VectorXd& x) const;
    /// -tr(A0 H), the subprincipal zeroth-order coefficient at critical points.
    double c1(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd B(const Eigen::VectorXd& x) const { return b0.jacobian(x); }
    Eigen::MatrixXd Lambda(const Eigen::VectorXd& x) const;
};

OperatorSpec make_spec(SmoothMap f, SmoothMap A0, SmoothMap b0,
                       std::optional<SmoothMap> user_c0 = std::nullopt);

struct EikonalReport {
    double max_c_residual = 0.0;   // |<A0 grad f, grad f> - c0| (user-supplied c0 only)
    double max_b_residual = 0.0;   // |b0 . grad f|
    double min_A0_eigenvalue = 0.0;
    double max_A0_asymmetry = 0.0;
    double scale = 1.0;            // magnitude reference for the residuals
    bool pass(double tol = 1e-10) const {
        return max_c_residual <= tol * scale && max_b_residual <= tol * scale &&
               min_A0_eigenvalue >= -tol * scale && max_A0_asymmetry <= tol * scale;
    }
};

/// Checks the eikonal identities and A0 symmetry/positivity at quasi-random
/// sample points of the box.
EikonalReport verify_eikonal(const OperatorSpec& spec, const landscape::Box& domain,
                             int sample_count);

struct StructureReport {
    double b0_residual = 0.0;      // |b0(u)|
    double c0_residual = 0.0;      // |c0(u)|
    double antisym_residual = 0.0; // ||B^t H + H B|| / (||H|| ||B||)
    int kalman_rank = 0;
    bool kalman_pass = false;      // rank [A0, B A0, ..., B^{d-1} A0] = d
    bool hessian_invertible = false;
    bool pass() const {
        return b0_residual <= 1e-8 && c0_residual <= 1e-8 && antisym_residual <= 1e-10 &&
               kalman_pass && hessian_invertible;
    }
};

/// Checks at one critical point: vanishing of b0 and c0, antisymmetry of
/// B^t H, the Kalman rank condition on (A0, B), and invertibility of H.
/// Together these certify that the quadratic approximation of the operator at
/// u has discrete spectrum with the expected structure.
StructureReport verify_critical_structure(const OperatorSpec& spec,
                                          const landscape::CriticalPoint& u);

struct HarmonicValue {
    std::complex<double> value;
    int multiplicity = 1;
};

struct CriticalAnalysis {
    landscape::CriticalPoint point;
    Eigen::MatrixXd B;
    Eigen::MatrixXd Lambda;
    Eigen::VectorXcd lambda_spectrum;
    int n_minus = 0, n_axis = 0, n_plus = 0;
    // saddle (index 1) data; eta is stored up to sign
    double mu = 0.0;
    Eigen::VectorXd eta;
    // eigenvalues of the fundamental matrix with positive imaginary part
    Eigen::VectorXcd fundamental;
    double c1 = 0.0;
    std::complex<double> tr_tilde;
    // harmonic-approximation values (1/i) sum nu_l lambda_l + tr_tilde / 2
    // over |nu| <= requested degree, sorted by real part; coincident values
    // merged with summed multiplicity
    std::vector<HarmonicValue> harmonic;
    bool merged_multiplicity = false;
};

CriticalAnalysis analyze_critical(const OperatorSpec& spec, const landscape::CriticalPoint& u,
                                  int harmonic_degree = 1);

/// Data to assemble the exactly-Gibbs-preserving divergence-free perturbation
/// b_per = e^{2(f - C0)/h} (d_2 chi, -d_1 chi); its strength is h-dependent,
/// so the field is produced on demand.
struct SusyPerturbation {
    Expression chi = Expression::constant(0.0);  // smooth bump in 2 variables
    double C0 = 0.0;
    SmoothMap field(const SmoothMap& f, double h) const;
};

struct Gallery {
    OperatorSpec spec;
    std::optional<SusyPerturbation> susy;
};

struct GalleryParams {
    std::string f_text;      // witten / nonreversible / susy_breaking
    std::string V_text;      // kfp: potential in x1
    std::string W_text;      // kfp: kinetic profile in x1 (substituted to x2)
    double gamma = 1.0;      // kfp friction
    double C0 = 0.0;         // susy_breaking level constant
    std::string chi_text;    // susy_breaking bump in (x1, x2)
    int dim = 1;             // witten dimension
};

/// name in {witten, nonreversible, kfp, susy_breaking}
Gallery gallery(const std::string& name, const GalleryParams& params);

struct HypoReport {
    bool heuristic = true;          // sampled check: can refute, never certify
    double min_fraction = 1.0;      // min over samples of meas{t : c0 >= 1/C}/(2T)
    int flagged = 0;                // samples with fraction below threshold
    int skipped = 0;                // flows that left the domain
    int sampled = 0;
    bool refuted() const { return flagged > 0; }
};

/// Integrates the drift flow x' = b0(x) by RK4 over [-T, T] from sample points
/// away from the critical set and measures where c0 exceeds 1/C.
HypoReport check_hypo(const OperatorSpec& spec, const landscape::Box& domain, double T,
                      double C, int sample_count = 64,
                      const std::vector<landscape::CriticalPoint>* criticals = nullptr);

/// Halton low-discrepancy point in the box (index >= 1).
Eigen::VectorXd halton_point(int index, const landscape::Box& box);

}  // namespace metastab::op
