#include "metastab/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>

namespace metastab::landscape {

bool Box::contains(const Eigen::VectorXd& x, double margin) const {
    for (int i = 0; i < dim(); ++i)
        if (x[i] < lo[i] - margin || x[i] > hi[i] + margin) return false;
    return true;
}

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - tol) return true;
        if (a[i] > b[i] + tol) return false;
    }
    return false;
}

std::optional<Eigen::VectorXd> newton_refine(const SmoothMap& f, Eigen::VectorXd x,
                                             const Box& box, double tol) {
    const double escape = 2.0 * box.diameter();
    Eigen::VectorXd center = 0.5 * (box.lo + box.hi);
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::VectorXd g = f.gradient(x);
        if (!g.allFinite()) return std::nullopt;
        if (g.norm() <= tol) return x;
        Eigen::MatrixXd H = f.hessian(x);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
        Eigen::VectorXd p;
        if (lu.isInvertible())
            p = lu.solve(-g);
        else
            p = -g;  // fall back to a gradient step near degenerate Hessians
        double alpha = 1.0;
        double gn = g.norm();
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            Eigen::VectorXd xn = x + alpha * p;
            Eigen::VectorXd gn2 = f.gradient(xn);
            if (gn2.allFinite() && gn2.norm() < gn) {
                x = xn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) return std::nullopt;
        if ((x - center).norm() > escape) return std::nullopt;
    }
    return f.gradient(x).norm() <= 100 * tol ? std::optional<Eigen::VectorXd>(x) : std::nullopt;
}

int morse_index(const Eigen::MatrixXd& H, double degeneracy_tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    int k = 0;
    for (int i = 0; i < H.rows(); ++i) {
        double ev = es.eigenvalues()[i];
        if (std::abs(ev) <= degeneracy_tol)
            throw LandscapeError("degenerate critical point: Hessian eigenvalue near zero");
        if (ev < 0) ++k;
    }
    return k;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<CriticalPoint> find_critical_points(const SmoothMap& f, const Box& box,
                                                int seeds_per_axis, double newton_tol,
                                                double degeneracy_tol) {
    const int d = box.dim();
    if (seeds_per_axis < 2) throw LandscapeError("need at least 2 seeds per axis");
    const double dedupe = 1e-6 * box.diameter();

    std::vector<CriticalPoint> found;
    std::vector<int> idx(d, 0);
    bool done = false;
    while (!done) {
        Eigen::VectorXd seed(d);
        for (int i = 0; i < d; ++i)
            seed[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (seeds_per_axis - 1);
        auto x = newton_refine(f, seed, box, newton_tol);
        if (x && box.contains(*x, 1e-9 * box.diameter())) {
            bool duplicate = false;
            for (const auto& c : found)
                if ((c.x - *x).norm() < dedupe) {
                    duplicate = true;
                    break;
                }
            if (!duplicate) {
                CriticalPoint c;
                c.x = *x;
                c.value = f.evaluate_scalar(*x);
                c.hessian = f.hessian(*x);
                c.index = morse_index(c.hessian, degeneracy_tol);
                found.push_back(std::move(c));
            }
        }
        // advance mixed-radix counter
        int axis = 0;
        while (axis < d && ++idx[axis] == seeds_per_axis) idx[axis++] = 0;
        done = (axis == d);
    }
    if (found.empty()) throw LandscapeError("no critical points found in the box");
    std::sort(found.begin(), found.end(), [&](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.value != b.value) return a.value < b.value;
        return lex_less(a.x, b.x, 0.0);
    });
    return found;
}

int MergeStructure::vertex_count() const {
    int n = 1;
    for (int r : res) n *= r;
    return n;
}

Eigen::VectorXd MergeStructure::vertex_position(int v) const {
    const int d = box.dim();
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) {
        int q = v % res[i];
        v /= res[i];
        x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * q / (res[i] - 1);
    }
    return x;
}

int MergeStructure::nearest_vertex(const Eigen::VectorXd& x) const {
    const int d = box.dim();
    int v = 0, stride = 1;
    for (int i = 0; i < d; ++i) {
        double t = (x[i] - box.lo[i]) / (box.hi[i] - box.lo[i]) * (res[i] - 1);
        int q = std::clamp(static_cast<int>(std::lround(t)), 0, res[i] - 1);
        v += stride * q;
        stride *= res[i];
    }
    return v;
}

namespace {

// all 3^d - 1 neighbors of vertex v on the grid
void for_each_neighbor(const std::vector<int>& res, int v, const std::function<void(int)>& fn) {
    const int d = static_cast<int>(res.size());
    std::vector<int> coord(d);
    int t = v;
    for (int i = 0; i < d; ++i) {
        coord[i] = t % res[i];
        t /= res[i];
    }
    std::vector<int> off(d, -1);
    while (true) {
        bool zero = true, valid = true;
        int nb = 0, stride = 1;
        for (int i = 0; i < d; ++i) {
            if (off[i] != 0) zero = false;
            int c = coord[i] + off[i];
            if (c < 0 || c >= res[i]) valid = false;
            nb += stride * c;
            stride *= res[i];
        }
        if (!zero && valid) fn(nb);
        int axis = 0;
        while (axis < d && ++off[axis] == 2) off[axis++] = -1;
        if (axis == d) break;
    }
}

/// Steepest descent (with backtracking) from x0 to a local minimum, matched
/// against the known critical minima. Returns a critical index.
int descend_to_minimum(const SmoothMap& f, Eigen::VectorXd x, const Box& box,
                       const std::vector<CriticalPoint>& criticals,
                       const std::vector<int>& minima) {
    double alpha = 0.05 * box.diameter();
    for (int iter = 0; iter < 5000; ++iter) {
        Eigen::VectorXd g = f.gradient(x);
        if (g.norm() < 1e-7) break;
        double fx = f.evaluate_scalar(x);
        Eigen::VectorXd dir = -g / g.norm();
        bool moved = false;
        while (alpha > 1e-14 * box.diameter()) {
            Eigen::VectorXd xn = x + alpha * dir;
            for (int i = 0; i < box.dim(); ++i) xn[i] = std::clamp(xn[i], box.lo[i], box.hi[i]);
            if (f.evaluate_scalar(xn) < fx - 1e-4 * alpha * g.norm()) {
                x = xn;
                moved = true;
                alpha *= 1.6;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
    }
    auto refined = newton_refine(f, x, box, 1e-9);
    if (refined) x = *refined;
    int best = -1;
    double best_dist = std::numeric_limits<double>::max();
    for (int mi : minima) {
        double dist = (criticals[mi].x - x).norm();
        if (dist < best_dist) {
            best_dist = dist;
            best = mi;
        }
    }
    if (best < 0 || best_dist > 1e-3 * box.diameter())
        throw LandscapeError("descent from a saddle did not reach a known minimum");
    return best;
}

}  // namespace

MergeStructure merge_tree(const SmoothMap& f, const Box& box, std::vector<int> resolution,
                          const std::vector<CriticalPoint>& criticals) {
    const int d = box.dim();
    if (d < 1 || d > 3) throw LandscapeError("grid labeling supports dimensions 1 to 3");
    if (static_cast<int>(resolution.size()) != d)
        throw LandscapeError("resolution must give one count per axis");

    MergeStructure ms(box, std::move(resolution), f, criticals);
    for (size_t i = 0; i < criticals.size(); ++i)
        if (criticals[i].index == 0) ms.minima.push_back(static_cast<int>(i));

    // each pair of critical points must be separated by more than 3 cells
    Eigen::VectorXd spacing(d);
    for (int i = 0; i < d; ++i) spacing[i] = (box.hi[i] - box.lo[i]) / (ms.res[i] - 1);
    for (size_t a = 0; a < criticals.size(); ++a)
        for (size_t b = a + 1; b < criticals.size(); ++b) {
            bool separated = false;
            for (int i = 0; i < d; ++i)
                if (std::abs(criticals[a].x[i] - criticals[b].x[i]) > 3 * spacing[i])
                    separated = true;
            if (!separated)
                throw LandscapeError("grid too coarse: critical points within 3 cells");
        }

    const int n = ms.vertex_count();
    ms.grid_values.resize(n);
    double vmin = kInf, vmax = -kInf;
    for (int v = 0; v < n; ++v) {
        double val = f.evaluate_scalar(ms.vertex_position(v));
        ms.grid_values[v] = val;
        vmin = std::min(vmin, val);
        vmax = std::max(vmax, val);
    }
    double crit_min = kInf, crit_max = -kInf;
    for (const auto& c : criticals) {
        crit_min = std::min(crit_min, c.value);
        crit_max = std::max(crit_max, c.value);
    }
    ms.tie_tol = 1e-9 * std::max(vmax - vmin, crit_max - crit_min);

    // minimal gap between distinct critical values; level queries sit delta
    // below a critical level, where component structure is unchanged
    std::vector<double> vals;
    for (const auto& c : criticals) vals.push_back(c.value);
    std::sort(vals.begin(), vals.end());
    double gap = kInf;
    for (size_t i = 1; i < vals.size(); ++i)
        if (vals[i] - vals[i - 1] > ms.tie_tol) gap = std::min(gap, vals[i] - vals[i - 1]);
    ms.delta = std::isfinite(gap) ? 0.45 * gap : 1.0;

    // boundary sample of f (confinement check data)
    ms.boundary_min = kInf;
    for (int v = 0; v < n; ++v) {
        int t = v;
        bool boundary = false;
        for (int i = 0; i < d; ++i) {
            int q = t % ms.res[i];
            t /= ms.res[i];
            if (q == 0 || q == ms.res[i] - 1) boundary = true;
        }
        if (boundary) ms.boundary_min = std::min(ms.boundary_min, ms.grid_values[v]);
    }

    // union-find sweep in increasing value order; a vertex joining two
    // existing components is a candidate separating saddle
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (ms.grid_values[a] != ms.grid_values[b]) return ms.grid_values[a] < ms.grid_values[b];
        return a < b;
    });
    UnionFind uf(n);
    std::vector<char> added(n, 0);
    struct Event {
        double level;
        int vertex;
    };
    std::vector<Event> events;
    for (int v : order) {
        added[v] = 1;
        std::set<int> roots;
        for_each_neighbor(ms.res, v, [&](int nb) {
            if (added[nb]) roots.insert(uf.find(nb));
        });
        int merges = std::max<int>(0, static_cast<int>(roots.size()) - 1);
        for (int k = 0; k < merges; ++k) events.push_back({ms.grid_values[v], v});
        for (int r : roots) uf.unite(r, v);
    }

    // refine events to saddles and keep the separating ones
    std::set<int> consumed;
    for (const auto& ev : events) {
        auto refined = newton_refine(f, ms.vertex_position(ev.vertex), box, 1e-9);
        if (!refined) throw LandscapeError("grid too coarse: saddle refinement diverged");
        int match = -1;
        double best = std::numeric_limits<double>::max();
        for (size_t i = 0; i < criticals.size(); ++i) {
            double dist = (criticals[i].x - *refined).norm();
            if (dist < best) {
                best = dist;
                match = static_cast<int>(i);
            }
        }
        if (match < 0 || best > 1e-4 * box.diameter() || criticals[match].index != 1)
            throw LandscapeError("grid too coarse: merge event has no matching saddle");
        if (consumed.count(match))
            throw LandscapeError("grid too coarse: merge event refines to a consumed saddle");
        consumed.insert(match);

        const CriticalPoint& s = criticals[match];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.hessian);
        Eigen::VectorXd vneg = es.eigenvectors().col(0);  // most negative curvature
        double eps = std::max(2.0 * spacing.maxCoeff(), 1e-5 * box.diameter());
        int ma = descend_to_minimum(f, s.x + eps * vneg, box, criticals, ms.minima);
        int mb = descend_to_minimum(f, s.x - eps * vneg, box, criticals, ms.minima);
        if (ma == mb) continue;  // not separating at this level
        // separating iff the branches land in different components of {f < f(s)}
        auto comps = ms.minima_components(s.value - ms.delta);
        auto pos = [&](int mi) {
            return static_cast<int>(std::find(ms.minima.begin(), ms.minima.end(), mi) -
                                    ms.minima.begin());
        };
        if (comps[pos(ma)] == comps[pos(mb)]) continue;
        ms.saddles.push_back({match, s.value, std::min(ma, mb), std::max(ma, mb)});
    }
    std::sort(ms.saddles.begin(), ms.saddles.end(),
              [&](const SeparatingSaddle& a, const SeparatingSaddle& b) {
                  if (a.value != b.value) return a.value < b.value;
                  return lex_less(criticals[a.critical].x, criticals[b.critical].x, 0.0);
              });
    return ms;
}

std::vector<int> MergeStructure::minima_components(double level) const {
    const int n = vertex_count();
    UnionFind uf(n);
    for (int v = 0; v < n; ++v) {
        if (grid_values[v] >= level) continue;
        for_each_neighbor(res, v, [&](int nb) {
            if (nb < v && grid_values[nb] < level) uf.unite(v, nb);
        });
    }
    std::vector<int> out;
    out.reserve(minima.size());
    for (int mi : minima) {
        int v = nearest_vertex(criticals[mi].x);
        if (grid_values[v] >= level) {
            // the snapped vertex may sit slightly above a very tight level;
            // fall back to the best neighbor
            int best = -1;
            double bv = level;
            for_each_neighbor(res, v, [&](int nb) {
                if (grid_values[nb] < bv) {
                    bv = grid_values[nb];
                    best = nb;
                }
            });
            v = best;
        }
        out.push_back(v < 0 ? -1 : uf.find(v));
    }
    return out;
}

int Labeling::find(int critical) const {
    for (size_t i = 0; i < minima.size(); ++i)
        if (minima[i].critical == critical) return static_cast<int>(i);
    return -1;
}

Labeling label(const MergeStructure& ms) {
    const auto& criticals = ms.criticals;
    if (ms.minima.empty()) throw LandscapeError("no minima to label");

    double max_saddle = -kInf;
    for (const auto& s : ms.saddles) max_saddle = std::max(max_saddle, s.value);
    if (!ms.saddles.empty() && ms.boundary_min <= max_saddle)
        throw LandscapeError("landscape not confining on the box: boundary dips below a saddle level");

    Labeling lab;

    // distinct separating levels, descending
    std::vector<double> levels;
    for (const auto& s : ms.saddles) levels.push_back(s.value);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end(),
                             [&](double a, double b) { return std::abs(a - b) <= ms.tie_tol; }),
                 levels.end());
    lab.sigma_levels = levels;

    // level sigma_1 = +inf: label the global minimum
    std::map<int, MinimumLabel> labeled;  // critical index -> label
    {
        int best = ms.minima[0];
        bool tie = false;
        for (int mi : ms.minima) {
            if (criticals[mi].value < criticals[best].value - ms.tie_tol)
                best = mi;
            else if (std::abs(criticals[mi].value - criticals[best].value) <= ms.tie_tol &&
                     mi != best) {
                if (lex_less(criticals[mi].x, criticals[best].x, 0.0)) best = mi;
                tie = true;
            }
        }
        MinimumLabel g;
        g.critical = best;
        g.tie_flag = tie;
        lab.degenerate_tie |= tie;
        labeled[best] = g;
    }

    auto minima_pos = [&](int mi) {
        return static_cast<int>(std::find(ms.minima.begin(), ms.minima.end(), mi) -
                                ms.minima.begin());
    };

    std::vector<std::vector<int>> comps_at_level(levels.size());
    for (size_t i = 0; i < levels.size(); ++i)
        comps_at_level[i] = ms.minima_components(levels[i] - ms.delta);

    struct Pending {  // per-level class construction data
        std::vector<int> members;   // critical indices labeled at this level
        std::map<int, int> comp_of; // critical index -> component id (E(m))
        std::set<int> omega;        // component ids in the closure-chain family
    };
    std::vector<Pending> pend(levels.size());

    for (size_t i = 0; i < levels.size(); ++i) {
        const auto& comp = comps_at_level[i];
        // group unlabeled minima by component
        std::map<int, std::vector<int>> groups;
        for (size_t k = 0; k < ms.minima.size(); ++k)
            if (comp[k] >= 0) groups[comp[k]].push_back(ms.minima[k]);
        for (auto& [cid, members] : groups) {
            bool has_labeled = false;
            for (int mi : members)
                if (labeled.count(mi)) has_labeled = true;
            if (has_labeled) continue;
            int best = members[0];
            bool tie = false;
            for (int mi : members) {
                if (criticals[mi].value < criticals[best].value - ms.tie_tol)
                    best = mi;
                else if (mi != best &&
                         std::abs(criticals[mi].value - criticals[best].value) <= ms.tie_tol) {
                    if (lex_less(criticals[mi].x, criticals[best].x, 0.0)) best = mi;
                    tie = true;
                }
            }
            MinimumLabel rec;
            rec.critical = best;
            rec.sigma = levels[i];
            rec.S = levels[i] - criticals[best].value;
            rec.tie_flag = tie;
            lab.degenerate_tie |= tie;
            for (const auto& s : ms.saddles) {
                if (std::abs(s.value - levels[i]) > ms.tie_tol) continue;
                int ca = comp[minima_pos(s.minimum_a)];
                int cb = comp[minima_pos(s.minimum_b)];
                if (ca == cid || cb == cid) rec.saddles.push_back(s.critical);
            }
            if (rec.saddles.empty())
                throw LandscapeError("labeling inconsistency: component without boundary saddle");
            labeled[best] = rec;
            pend[i].members.push_back(best);
            pend[i].comp_of[best] = cid;
            pend[i].omega.insert(cid);
        }
    }

    for (int mi : ms.minima)
        if (!labeled.count(mi))
            throw LandscapeError("labeling inconsistency: minimum never separated");

    // reference minima m_hat, reference components, and type flags
    for (size_t i = 0; i < levels.size(); ++i) {
        for (int mi : pend[i].members) {
            MinimumLabel& rec = labeled[mi];
            // component of {f < previous level} containing m
            std::vector<int> prev;
            if (i == 0) {
                // whole domain: every minimum shares the component
                prev.assign(ms.minima.size(), 0);
            } else {
                prev = comps_at_level[i - 1];
            }
            int my_comp = prev[minima_pos(mi)];
            int hat = -1;
            for (size_t k = 0; k < ms.minima.size(); ++k) {
                int other = ms.minima[k];
                if (other == mi || prev[k] != my_comp) continue;
                const MinimumLabel& ol = labeled[other];
                if (ol.sigma > rec.sigma + ms.tie_tol) {
                    if (hat >= 0)
                        throw LandscapeError("labeling inconsistency: reference minimum not unique");
                    hat = other;
                }
            }
            if (hat < 0)
                throw LandscapeError("labeling inconsistency: no reference minimum found");
            rec.m_hat = hat;
            rec.type_two =
                std::abs(criticals[hat].value - criticals[mi].value) <= ms.tie_tol;
            lab.has_type_two |= rec.type_two;
            if (rec.type_two)
                pend[i].omega.insert(comps_at_level[i][minima_pos(hat)]);
        }
    }

    // equivalence classes per level: components of the family touch when a
    // saddle at this level is adjacent to both
    int next_class = 1;
    std::map<int, int> class_of;  // critical index -> class id
    for (size_t i = 0; i < levels.size(); ++i) {
        if (pend[i].members.empty()) continue;
        const auto& comp = comps_at_level[i];
        std::map<int, int> comp_group;  // component id -> group representative
        for (int c : pend[i].omega) comp_group[c] = c;
        std::function<int(int)> find_grp = [&](int c) {
            while (comp_group[c] != c) c = comp_group[c] = comp_group[comp_group[c]];
            return c;
        };
        for (const auto& s : ms.saddles) {
            if (std::abs(s.value - levels[i]) > ms.tie_tol) continue;
            int ca = comp[minima_pos(s.minimum_a)];
            int cb = comp[minima_pos(s.minimum_b)];
            if (pend[i].omega.count(ca) && pend[i].omega.count(cb))
                comp_group[find_grp(ca)] = find_grp(cb);
        }
        std::map<int, int> group_class;
        for (int mi : pend[i].members) {
            int g = find_grp(pend[i].comp_of[mi]);
            if (!group_class.count(g)) group_class[g] = next_class++;
            class_of[mi] = group_class[g];
        }
    }

    // assemble final ordering: S ascending, global minimum last
    for (auto& [mi, rec] : labeled) {
        if (rec.m_hat >= 0) rec.class_id = class_of[mi];
        lab.minima.push_back(rec);
    }
    std::sort(lab.minima.begin(), lab.minima.end(),
              [&](const MinimumLabel& a, const MinimumLabel& b) {
                  if (a.S != b.S) return a.S < b.S;
                  return lex_less(criticals[a.critical].x, criticals[b.critical].x, 0.0);
              });

    std::map<int, std::vector<int>> by_class;
    for (size_t i = 0; i < lab.minima.size(); ++i)
        by_class[lab.minima[i].class_id].push_back(static_cast<int>(i));
    for (auto& [cid, members] : by_class)
        if (cid != 0) lab.classes.push_back(members);
    lab.classes.push_back(by_class[0]);  // the global minimum's singleton class, last
    return lab;
}

GenerReport check_gener(const Labeling& lab, const MergeStructure& ms) {
    GenerReport rep;
    const auto& criticals = ms.criticals;

    for (const auto& rec : lab.minima) {
        // minima sharing m's component at level sigma(m) with equal depth
        std::vector<int> comp;
        if (std::isinf(rec.sigma))
            comp.assign(ms.minima.size(), 0);
        else
            comp = ms.minima_components(rec.sigma - ms.delta);
        int pos = -1;
        for (size_t k = 0; k < ms.minima.size(); ++k)
            if (ms.minima[k] == rec.critical) pos = static_cast<int>(k);
        for (size_t k = 0; k < ms.minima.size(); ++k) {
            int other = ms.minima[k];
            if (other == rec.critical || comp[k] != comp[pos]) continue;
            if (std::abs(criticals[other].value - criticals[rec.critical].value) <= ms.tie_tol) {
                rep.unique_minima = false;
                rep.violating_pairs.emplace_back(rec.critical, other);
            }
        }
        if (rec.type_two) rep.type_two_empty = false;
    }

    for (size_t a = 0; a < lab.minima.size(); ++a)
        for (size_t b = a + 1; b < lab.minima.size(); ++b) {
            for (int sa : lab.minima[a].saddles)
                for (int sb : lab.minima[b].saddles)
                    if (sa == sb) {
                        rep.disjoint_saddle_sets = false;
                        rep.violating_pairs.emplace_back(lab.minima[a].critical,
                                                         lab.minima[b].critical);
                    }
        }
    return rep;
}

}  // namespace metastab::landscape
