#include "gvar/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gvar/symfun.hpp"
#include "golden_section.hpp"

namespace gvar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_measure(const DesignMeasure& xi) {
    if (!xi.space) throw DomainError("design measure has no space");
    if (xi.weights.size() != xi.space->size())
        throw DomainError("design weight count does not match the space");
    if ((xi.weights.array() < 0.0).any())
        throw DomainError("design weights must be nonnegative");
    if (std::abs(xi.weights.sum() - 1.0) > 1e-9)
        throw DomainError("design weights must sum to one");
}

Eigen::MatrixXd info_matrix_raw(const Eigen::MatrixXd& F, const Eigen::VectorXd& w) {
    Eigen::MatrixXd M = F.transpose() * w.asDiagonal() * F;
    return (M + M.transpose()) / 2.0;
}

// Nonincreasing clamped eigenvalues of a symmetric matrix.
Eigen::VectorXd spectrum_of(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().reverse().cwiseMax(0.0);
}

bool spectrum_nonsingular(const Eigen::VectorXd& eigs) {
    return eigs(eigs.size() - 1) > 1e-12 * eigs(0);
}

// log psi~_k(M) = (1/k)[log det M - log E_{d-k}(M) - log((k+1)/k!)]
double log_criterion_from_spectrum(const Eigen::VectorXd& eigs, int k) {
    const int d = static_cast<int>(eigs.size());
    if (!spectrum_nonsingular(eigs)) return -kInf;
    const double log_det = eigs.array().log().sum();
    const double lmax = eigs(0);
    const double e_comp = elementary_symmetric(eigs / lmax, d - k);
    const double log_e = std::log(e_comp) + (d - k) * std::log(lmax);
    const double log_coef =
        std::log(static_cast<double>(k + 1)) - std::lgamma(static_cast<double>(k + 1));
    return (log_det - log_e - log_coef) / k;
}

// log det M - log Psi_{d-k}(M); the concave surrogate maximized by the solver.
double log_form_from_spectrum(const Eigen::VectorXd& eigs, int k) {
    const int d = static_cast<int>(eigs.size());
    if (!spectrum_nonsingular(eigs)) return -kInf;
    const double log_det = eigs.array().log().sum();
    if (k == d) return log_det; // Psi_0 = 1
    const double lmax = eigs(0);
    const double e_comp = elementary_symmetric(eigs / lmax, d - k);
    const double log_psi_comp = std::log(static_cast<double>(d - k + 1)) -
                                std::lgamma(static_cast<double>(d - k + 1)) +
                                std::log(e_comp) + (d - k) * std::log(lmax);
    return log_det - log_psi_comp;
}

// f_j^T B f_j for every row of F.
Eigen::VectorXd quadratic_scores(const Eigen::MatrixXd& F, const Eigen::MatrixXd& B) {
    return ((F * B).cwiseProduct(F)).rowwise().sum();
}

Eigen::Index argmax_lowest(const Eigen::VectorXd& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

// B = M^{-1} gradPsi_k[M^{-1}]/Psi_k(M^{-1}) M^{-1}
Eigen::MatrixXd sensitivity_matrix(const CovMatrix& M, int k) {
    const Eigen::MatrixXd inv = M.inverse();
    const Eigen::MatrixXd ratio = psi_gradient_ratio(CovMatrix(inv), k);
    Eigen::MatrixXd B = inv * ratio * inv;
    return (B + B.transpose()) / 2.0;
}

struct SymmetryMap {
    bool enabled = false;
    double center = 0.0;
};

// A space is treated as symmetric when its labels are mirror-symmetric about
// the interval midpoint and the regressor components flip by a consistent
// sign pattern under that mirror (true for polynomial models on [-c, c]).
SymmetryMap detect_symmetry(const DesignSpace& space) {
    SymmetryMap map;
    const Eigen::Index m = space.size();
    if (m < 2 || space.labels.size() != static_cast<std::size_t>(m)) return map;
    const double span = space.label_hi - space.label_lo;
    if (!(span > 0.0)) return map;
    const double center = (space.label_lo + space.label_hi) / 2.0;
    const double tol = 1e-9 * std::max(1.0, span);
    for (Eigen::Index j = 0; j < m; ++j) {
        if (std::abs(space.labels[static_cast<std::size_t>(j)] +
                     space.labels[static_cast<std::size_t>(m - 1 - j)] - 2.0 * center) > tol)
            return map;
    }
    const int d = space.dim();
    const double scale = space.regressors.cwiseAbs().maxCoeff();
    std::vector<int> sign(static_cast<std::size_t>(d), 0);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (int i = 0; i < d; ++i) {
            const double a = space.regressors(m - 1 - j, i);
            const double b = space.regressors(j, i);
            if (std::abs(a) <= 1e-12 * scale && std::abs(b) <= 1e-12 * scale) continue;
            if (std::abs(b) <= 1e-12 * scale || std::abs(a) <= 1e-12 * scale) return map;
            const double r = a / b;
            if (std::abs(std::abs(r) - 1.0) > 1e-9) return map;
            const int s = r > 0.0 ? 1 : -1;
            auto& si = sign[static_cast<std::size_t>(i)];
            if (si == 0)
                si = s;
            else if (si != s)
                return map;
        }
    }
    map.enabled = true;
    map.center = center;
    return map;
}

void symmetrize_weights(Eigen::VectorXd& w) {
    const Eigen::Index m = w.size();
    for (Eigen::Index j = 0; j < m / 2; ++j) {
        const double avg = (w(j) + w(m - 1 - j)) / 2.0;
        w(j) = avg;
        w(m - 1 - j) = avg;
    }
}

struct GridState {
    Eigen::VectorXd weights;
    Eigen::MatrixXd M;
    Eigen::VectorXd eigs;
    double objective; // log det - log Psi_{d-k}
};

GridState make_state(const Eigen::MatrixXd& F, Eigen::VectorXd w, int k) {
    GridState st;
    st.weights = std::move(w);
    st.M = info_matrix_raw(F, st.weights);
    st.eigs = spectrum_of(st.M);
    st.objective = log_form_from_spectrum(st.eigs, k);
    return st;
}

// Multiplicative reweighting. The plain w * v/k update can enter a 2-cycle
// for some criteria (classically for the A-optimal end), while the damped
// square-root update is the convergent variant there; evaluating both and
// keeping the better one ascends in every regime.
bool multiplicative_step(GridState& st, const Eigen::MatrixXd& F, const Eigen::VectorXd& scores,
                         int k) {
    const Eigen::VectorXd factor = scores / static_cast<double>(k);
    Eigen::VectorXd w1 = st.weights.cwiseProduct(factor);
    w1 /= w1.sum();
    GridState full = make_state(F, std::move(w1), k);
    Eigen::VectorXd w2 = st.weights.cwiseProduct(factor.cwiseSqrt());
    w2 /= w2.sum();
    GridState damped = make_state(F, std::move(w2), k);
    GridState& trial = full.objective >= damped.objective ? full : damped;
    if (trial.objective >= st.objective - 1e-13 * std::max(1.0, std::abs(st.objective))) {
        st = std::move(trial);
        return true;
    }
    return false;
}

} // namespace

DesignSpace polynomial_design_space(int degree, double a, double b, double grid_step) {
    if (degree < 1) throw DomainError("polynomial degree must be >= 1");
    if (!(grid_step > 0.0)) throw DomainError("grid step must be positive");
    if (!(b > a)) throw DomainError("empty design interval");
    const long steps = std::max(1L, std::lround((b - a) / grid_step));
    const Eigen::Index m = static_cast<Eigen::Index>(steps) + 1;
    DesignSpace space;
    space.labels.resize(static_cast<std::size_t>(m));
    space.regressors.resize(m, degree + 1);
    space.regressor_at = [degree](double t) {
        Eigen::VectorXd f(degree + 1);
        double power = 1.0;
        for (int p = 0; p <= degree; ++p) {
            f(p) = power;
            power *= t;
        }
        return f;
    };
    for (Eigen::Index i = 0; i < m; ++i) {
        const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(steps);
        space.labels[static_cast<std::size_t>(i)] = t;
        space.regressors.row(i) = space.regressor_at(t).transpose();
    }
    space.label_lo = a;
    space.label_hi = b;
    return space;
}

DesignSpace regressor_design_space(Eigen::MatrixXd regressors) {
    if (regressors.rows() < 1 || regressors.cols() < 1)
        throw DomainError("design space needs at least one regressor row");
    if (!regressors.allFinite()) throw DomainError("regressors have non-finite entries");
    DesignSpace space;
    space.labels.resize(static_cast<std::size_t>(regressors.rows()));
    for (std::size_t j = 0; j < space.labels.size(); ++j)
        space.labels[j] = static_cast<double>(j);
    space.label_lo = 0.0;
    space.label_hi = static_cast<double>(regressors.rows() - 1);
    space.regressors = std::move(regressors);
    return space;
}

CovMatrix info_matrix(const DesignMeasure& xi) {
    validate_measure(xi);
    return CovMatrix(info_matrix_raw(xi.space->regressors, xi.weights));
}

double design_criterion_matrix(const CovMatrix& M, int k) {
    if (k < 1 || k > M.dim())
        throw DomainError("design criterion: k outside 1.." + std::to_string(M.dim()));
    const double log_value = log_criterion_from_spectrum(M.spectrum(), k);
    return std::isfinite(log_value) ? std::exp(log_value) : 0.0;
}

double design_criterion(const DesignMeasure& xi, int k) {
    return design_criterion_matrix(info_matrix(xi), k);
}

double design_criterion_log_matrix(const CovMatrix& M, int k) {
    if (k < 1 || k > M.dim())
        throw DomainError("design criterion: k outside 1.." + std::to_string(M.dim()));
    return log_form_from_spectrum(M.spectrum(), k);
}

double design_criterion_log(const DesignMeasure& xi, int k) {
    return design_criterion_log_matrix(info_matrix(xi), k);
}

Eigen::VectorXd variance_function_all(const DesignMeasure& xi, int k) {
    const CovMatrix M = info_matrix(xi);
    if (k < 1 || k > M.dim())
        throw DomainError("variance function: k outside 1.." + std::to_string(M.dim()));
    return quadratic_scores(xi.space->regressors, sensitivity_matrix(M, k));
}

double variance_function(const DesignMeasure& xi, Eigen::Index index, int k) {
    if (index < 0 || index >= xi.space->size())
        throw DomainError("variance function: point index out of range");
    return variance_function_all(xi, k)(index);
}

Eigen::VectorXd variance_function_complement_all(const DesignMeasure& xi, int k) {
    const CovMatrix M = info_matrix(xi);
    const int d = M.dim();
    if (k < 1 || k > d) throw DomainError("variance function: k outside 1.." + std::to_string(d));
    const Eigen::MatrixXd inv = M.inverse();
    Eigen::VectorXd scores = quadratic_scores(xi.space->regressors, inv);
    if (d - k >= 1) {
        const Eigen::MatrixXd ratio = psi_gradient_ratio(M, d - k);
        scores -= quadratic_scores(xi.space->regressors, ratio);
    }
    return scores;
}

double variance_function_complement(const DesignMeasure& xi, Eigen::Index index, int k) {
    if (index < 0 || index >= xi.space->size())
        throw DomainError("variance function: point index out of range");
    return variance_function_complement_all(xi, k)(index);
}

namespace {

struct PolishOutcome {
    bool ran = false;
    std::vector<PolishedPoint> points;
    Eigen::MatrixXd support_regressors;
    Eigen::VectorXd support_weights;
    double gap = kInf;
};

PolishOutcome polish_support(const DesignSpace& space, const GridState& grid, int k,
                             const DesignOptions& opts, const SymmetryMap& symmetry) {
    PolishOutcome out;
    if (!space.regressor_at) return out;

    // Contiguous grid-support runs collapse to single candidate locations.
    const Eigen::Index m = space.size();
    std::vector<std::pair<double, double>> clusters; // (location, weight)
    Eigen::Index j = 0;
    while (j < m) {
        if (grid.weights(j) <= opts.support_threshold) {
            ++j;
            continue;
        }
        double weight = 0.0, moment = 0.0;
        while (j < m && grid.weights(j) > opts.support_threshold) {
            weight += grid.weights(j);
            moment += grid.weights(j) * space.labels[static_cast<std::size_t>(j)];
            ++j;
        }
        clusters.emplace_back(moment / weight, weight);
    }
    const int d = space.dim();
    if (static_cast<int>(clusters.size()) < d) return out;

    const double h = (space.label_hi - space.label_lo) / static_cast<double>(m - 1);
    double total = 0.0;
    for (auto& c : clusters) total += c.second;
    for (auto& c : clusters) c.second /= total;

    Eigen::MatrixXd Fs;
    const auto rebuild = [&] {
        Fs.resize(static_cast<Eigen::Index>(clusters.size()), d);
        for (std::size_t i = 0; i < clusters.size(); ++i)
            Fs.row(static_cast<Eigen::Index>(i)) = space.regressor_at(clusters[i].first).transpose();
    };

    for (int round = 0; round < 250; ++round) {
        const std::size_t s = clusters.size();
        rebuild();
        Eigen::VectorXd ws(static_cast<Eigen::Index>(s));
        for (std::size_t i = 0; i < s; ++i) ws(static_cast<Eigen::Index>(i)) = clusters[i].second;
        GridState st = make_state(Fs, ws, k);
        if (!spectrum_nonsingular(st.eigs)) return out; // polishing collapsed; keep grid result
        Eigen::MatrixXd B = sensitivity_matrix(CovMatrix(st.M), k);

        // Relocate each support point halfway toward the local maximum of the
        // variance function. The undamped argmax map can overshoot into a
        // limit cycle around the optimum; the 0.5 step keeps it contractive.
        double movement = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            const double lo = std::max(space.label_lo, clusters[i].first - h);
            const double hi = std::min(space.label_hi, clusters[i].first + h);
            const auto objective = [&](double t) {
                const Eigen::VectorXd f = space.regressor_at(t);
                return f.dot(B * f);
            };
            const double refined = detail::golden_section_max(objective, lo, hi, 1e-13);
            const double next = clusters[i].first + 0.5 * (refined - clusters[i].first);
            movement = std::max(movement, std::abs(next - clusters[i].first));
            clusters[i].first = next;
        }
        if (symmetry.enabled) {
            std::sort(clusters.begin(), clusters.end());
            for (std::size_t i = 0; i < s / 2; ++i) {
                auto& low = clusters[i];
                auto& high = clusters[s - 1 - i];
                const double offset = (high.first - low.first) / 2.0;
                low.first = symmetry.center - offset;
                high.first = symmetry.center + offset;
                const double wavg = (low.second + high.second) / 2.0;
                low.second = wavg;
                high.second = wavg;
            }
            if (s % 2 == 1) clusters[s / 2].first = symmetry.center;
        }

        // Merge support points that collided during relocation.
        std::sort(clusters.begin(), clusters.end());
        for (std::size_t i = 0; i + 1 < clusters.size();) {
            if (clusters[i + 1].first - clusters[i].first < 0.01 * h) {
                const double w_sum = clusters[i].second + clusters[i + 1].second;
                if (w_sum > 0.0)
                    clusters[i].first = (clusters[i].first * clusters[i].second +
                                         clusters[i + 1].first * clusters[i + 1].second) /
                                        w_sum;
                clusters[i].second = w_sum;
                clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(i + 1));
            } else {
                ++i;
            }
        }

        // Re-optimize the weights on the fixed polished support.
        rebuild();
        ws.resize(static_cast<Eigen::Index>(clusters.size()));
        for (std::size_t i = 0; i < clusters.size(); ++i)
            ws(static_cast<Eigen::Index>(i)) = clusters[i].second;
        st = make_state(Fs, ws, k);
        for (long sweep = 0; sweep < 10000; ++sweep) {
            if (!spectrum_nonsingular(st.eigs)) return out;
            const Eigen::VectorXd v = quadratic_scores(Fs, sensitivity_matrix(CovMatrix(st.M), k));
            if ((v.array() - static_cast<double>(k)).abs().maxCoeff() <= opts.tol / 10.0) break;
            if (!multiplicative_step(st, Fs, v, k)) break;
            if (symmetry.enabled) {
                symmetrize_weights(st.weights);
                st = make_state(Fs, st.weights, k);
            }
        }
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            clusters[i].second = st.weights(static_cast<Eigen::Index>(i));
        }

        // Drop support points whose weight died off, as long as enough points
        // remain for a nonsingular information matrix.
        for (std::size_t i = 0; i < clusters.size() && clusters.size() > static_cast<std::size_t>(d);) {
            if (clusters[i].second < opts.support_threshold)
                clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(i));
            else
                ++i;
        }
        if (clusters.size() != static_cast<std::size_t>(st.weights.size())) {
            double renorm = 0.0;
            for (const auto& c : clusters) renorm += c.second;
            for (auto& c : clusters) c.second /= renorm;
            rebuild();
            ws.resize(static_cast<Eigen::Index>(clusters.size()));
            for (std::size_t i = 0; i < clusters.size(); ++i)
                ws(static_cast<Eigen::Index>(i)) = clusters[i].second;
            st = make_state(Fs, ws, k);
        }

        // Gap over the grid together with the polished support points.
        B = sensitivity_matrix(CovMatrix(st.M), k);
        const Eigen::VectorXd grid_scores = quadratic_scores(space.regressors, B);
        const Eigen::Index grid_best = argmax_lowest(grid_scores);
        const double support_max = quadratic_scores(Fs, B).maxCoeff();
        out.gap = std::max(grid_scores(grid_best), support_max) - static_cast<double>(k);
        out.ran = true;
        out.support_regressors = Fs;
        out.support_weights = st.weights;
        if (out.gap <= opts.tol && movement <= 1e-12) break;

        // Support discovery: when a grid point scores above every polished
        // point, bring it in as a fresh cluster (with its mirror when the
        // space is symmetric) and let the next round rebalance.
        if (grid_scores(grid_best) - static_cast<double>(k) > opts.tol &&
            grid_scores(grid_best) > support_max + opts.tol) {
            const double location = space.labels[static_cast<std::size_t>(grid_best)];
            bool fresh = true;
            for (const auto& c : clusters)
                if (std::abs(c.first - location) <= h) fresh = false;
            if (fresh) {
                const double entering = 1.0 / static_cast<double>(2 * clusters.size() + 2);
                for (auto& c : clusters) c.second *= (1.0 - entering);
                if (symmetry.enabled &&
                    std::abs(location - symmetry.center) > 1e-12 * std::max(1.0, h)) {
                    clusters.emplace_back(location, entering / 2.0);
                    clusters.emplace_back(2.0 * symmetry.center - location, entering / 2.0);
                } else {
                    clusters.emplace_back(location, entering);
                }
                std::sort(clusters.begin(), clusters.end());
            }
        }
    }
    out.points.clear();
    for (const auto& c : clusters) out.points.push_back({c.first, c.second});
    return out;
}

} // namespace

DesignResult solve_design(std::shared_ptr<const DesignSpace> space, int k,
                          const DesignOptions& opts) {
    if (!space) throw DomainError("solve_design: null space");
    const Eigen::Index m = space->size();
    const int d = space->dim();
    if (m < 1) throw DegenerateInputError("empty design space");
    if (k < 1 || k > d)
        throw DomainError("solve_design: k = " + std::to_string(k) + " outside 1.." +
                          std::to_string(d));
    const Eigen::MatrixXd& F = space->regressors;

    SymmetryMap symmetry;
    if (opts.symmetrize == Symmetrize::automatic)
        symmetry = detect_symmetry(*space);
    else if (opts.symmetrize == Symmetrize::on) {
        symmetry = detect_symmetry(*space);
        if (!symmetry.enabled)
            throw DomainError("symmetrization requested but the space is not mirror-symmetric");
    }

    GridState st = make_state(F, Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m)), k);
    if (!spectrum_nonsingular(st.eigs))
        throw DegenerateInputError("design space does not admit a nonsingular information matrix");

    // With polishing available, the grid phase is only a warm start (support
    // discovery); driving the gap to tol on the raw grid is left to the
    // polish loop, which converges much faster on the reduced support.
    const bool will_polish = opts.polish && static_cast<bool>(space->regressor_at);
    const long grid_budget = will_polish ? std::min<long>(opts.max_iter, 600) : opts.max_iter;

    DesignResult result;
    double gap = kInf;
    for (long iter = 1; iter <= grid_budget; ++iter) {
        result.iterations = iter;
        const Eigen::MatrixXd B = sensitivity_matrix(CovMatrix(st.M), k);
        const Eigen::VectorXd scores = quadratic_scores(F, B);
        const Eigen::Index best = argmax_lowest(scores);
        gap = scores(best) - static_cast<double>(k);
        if (gap <= opts.tol) {
            result.converged = true;
            break;
        }

        if (iter % 10 == 0) {
            // Vertex exchange: push mass toward the worst point along the
            // concave slice, then drop support points scoring below k - gap.
            const Eigen::VectorXd f = F.row(best).transpose();
            const Eigen::MatrixXd ff = f * f.transpose();
            const auto slice = [&](double alpha) {
                return log_form_from_spectrum(
                    spectrum_of((1.0 - alpha) * st.M + alpha * ff), k);
            };
            const double alpha = detail::golden_section_max(slice, 0.0, 1.0, 1e-12);
            Eigen::VectorXd w = st.weights * (1.0 - alpha);
            w(best) += alpha;
            const double cut = static_cast<double>(k) - gap;
            if (cut > 0.0) {
                for (Eigen::Index i = 0; i < m; ++i)
                    if (w(i) > 0.0 && scores(i) < cut) w(i) = 0.0;
            }
            w /= w.sum();
            GridState trial = make_state(F, std::move(w), k);
            if (spectrum_nonsingular(trial.eigs) && trial.objective >= st.objective - 1e-12)
                st = std::move(trial);
            else
                (void)multiplicative_step(st, F, scores, k);
        } else {
            (void)multiplicative_step(st, F, scores, k);
        }
        if (symmetry.enabled) {
            symmetrize_weights(st.weights);
            st = make_state(F, st.weights, k);
        }
    }

    DesignReport report;
    report.k = k;
    report.gap = gap;
    for (Eigen::Index i = 0; i < m; ++i)
        if (st.weights(i) > opts.support_threshold) report.support.push_back(i);

    if (opts.polish) {
        const PolishOutcome polished = polish_support(*space, st, k, opts, symmetry);
        if (polished.ran) {
            report.polished = polished.points;
            report.gap = polished.gap;
            result.converged = polished.gap <= opts.tol;

            auto reduced = std::make_shared<DesignSpace>();
            reduced->regressors = polished.support_regressors;
            reduced->labels.reserve(polished.points.size());
            for (const auto& p : polished.points) reduced->labels.push_back(p.location);
            reduced->regressor_at = space->regressor_at;
            reduced->label_lo = space->label_lo;
            reduced->label_hi = space->label_hi;
            result.measure = DesignMeasure{std::move(reduced), polished.support_weights};
            const CovMatrix M = info_matrix(result.measure);
            report.criterion = design_criterion_matrix(M, k);
            report.feasible = report.criterion > 0.0;
            result.report = std::move(report);
            return result;
        }
    }

    result.measure = DesignMeasure{space, st.weights};
    report.criterion = design_criterion_matrix(CovMatrix(st.M), k);
    report.feasible = report.criterion > 0.0;
    result.report = std::move(report);
    return result;
}

DesignResult solve_design(DesignSpace space, int k, const DesignOptions& opts) {
    return solve_design(std::make_shared<const DesignSpace>(std::move(space)), k, opts);
}

double efficiency(const DesignMeasure& xi, const DesignMeasure& xi_star, int k) {
    if (xi.space->dim() != xi_star.space->dim())
        throw DomainError("efficiency: model dimensions differ");
    const double reference = design_criterion(xi_star, k);
    if (reference <= 0.0) throw DomainError("efficiency: reference design is singular");
    return design_criterion(xi, k) / reference;
}

} // namespace gvar
