#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "metastab/smooth_map.hpp"

namespace metastab::landscape {

struct LandscapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Box {
    Eigen::VectorXd lo, hi;
    int dim() const { return static_cast<int>(lo.size()); }
    double diameter() const { return (hi - lo).norm(); }
    bool contains(const Eigen::VectorXd& x, double margin = 0.0) const;
};

struct CriticalPoint {
    Eigen::VectorXd x;
    double value = 0.0;
    int index = 0;  // negative Hessian eigenvalues
    Eigen::MatrixXd hessian;
};

/// Damped Newton on grad f from a regular seed grid; converged points inside
/// the box are deduplicated and classified by Hessian signature. Sorted by
/// (value, lexicographic location).
std::vector<CriticalPoint> find_critical_points(const SmoothMap& f, const Box& box,
                                                int seeds_per_axis,
                                                double newton_tol = 1e-10,
                                                double degeneracy_tol = 1e-8);

/// An index-1 critical point whose two descending branches reach different
/// connected components of the strict sublevel set at its value.
struct SeparatingSaddle {
    int critical = -1;    // index into the critical-point list
    double value = 0.0;
    int minimum_a = -1;   // critical indices of the minima its branches descend to
    int minimum_b = -1;
};

/// Sublevel-set merge data for f sampled on a regular grid: union-find over
/// the 3^d - 1 neighbor stencil in increasing value order, with merge events
/// refined to separating saddles.
class MergeStructure {
public:
    Box box;
    std::vector<int> res;                  // vertices per axis
    SmoothMap f;
    std::vector<CriticalPoint> criticals;
    std::vector<int> minima;               // critical indices of index-0 points
    std::vector<SeparatingSaddle> saddles; // sorted by (value, lexicographic location)
    double tie_tol = 0.0;                  // equal-value tolerance for critical levels
    double delta = 0.0;                    // safe offset below any critical level
    double boundary_min = 0.0;             // min of f over boundary grid vertices

    /// Component ids (stable within one call) of the connected components of
    /// {f < level} containing each entry of `minima`; -1 when the minimum
    /// itself is above the level.
    std::vector<int> minima_components(double level) const;

    MergeStructure(Box b, std::vector<int> r, SmoothMap field,
                   std::vector<CriticalPoint> crits)
        : box(std::move(b)), res(std::move(r)), f(std::move(field)),
          criticals(std::move(crits)) {}

    // grid internals, exposed for the validation pipeline
    std::vector<double> grid_values;
    int vertex_count() const;
    int nearest_vertex(const Eigen::VectorXd& x) const;
    Eigen::VectorXd vertex_position(int v) const;
};

MergeStructure merge_tree(const SmoothMap& f, const Box& box, std::vector<int> resolution,
                          const std::vector<CriticalPoint>& criticals);

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MinimumLabel {
    int critical = -1;          // index into criticals
    double sigma = kInf;        // value of the bounding saddles; +inf for the global minimum
    double S = kInf;            // sigma - f(m)
    std::vector<int> saddles;   // critical indices of the bounding separating saddles;
                                // empty for the global minimum (fictive saddle of value +inf)
    int m_hat = -1;             // critical index of the reference deeper minimum; -1 for global
    bool type_two = false;      // f(m_hat) == f(m) up to the tie tolerance
    int class_id = 0;
    bool tie_flag = false;      // equal-depth tie inside the labeled component
};

struct Labeling {
    /// Ordered by S ascending (lexicographic location tie-break); the global
    /// minimum (S = +inf) comes last.
    std::vector<MinimumLabel> minima;
    std::vector<double> sigma_levels;          // distinct finite levels, descending
    std::vector<std::vector<int>> classes;     // groups of indices into `minima`
    bool degenerate_tie = false;
    bool has_type_two = false;

    int find(int critical) const;  // position in `minima` of a critical index
};

Labeling label(const MergeStructure& ms);

struct GenerReport {
    bool unique_minima = true;       // each m is the unique global min of f on E(m)
    bool disjoint_saddle_sets = true;
    bool type_two_empty = true;
    std::vector<std::pair<int, int>> violating_pairs;  // critical indices
    bool pass() const { return unique_minima && disjoint_saddle_sets && type_two_empty; }
};

GenerReport check_gener(const Labeling& lab, const MergeStructure& ms);

}  // namespace metastab::landscape
