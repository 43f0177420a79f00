#include "oscdiff/study.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "oscdiff/discretization.hpp"
#include "oscdiff/errors.hpp"
#include "oscdiff/twoscale.hpp"

namespace oscdiff {

namespace {

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string cell_label(double eps, double dt, int n) {
    return "eps=" + shortest(eps) + " dt=" + shortest(dt) + " N=" + std::to_string(n);
}

// Re-raises the active exception with `where` prepended, keeping its category.
[[noreturn]] void rethrow_with(const std::string& where) {
    try {
        throw;
    } catch (const StepError& e) {
        throw StepError(where + ": " + e.what(), e.residual(), e.step());
    } catch (const NumericError& e) {
        throw NumericError(where + ": " + e.what());
    } catch (const ConfigurationError& e) {
        throw ConfigurationError(where + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(where + ": " + e.what());
    }
}

std::optional<int> twoscale_order(std::string_view scheme) {
    if (scheme == "twoscale1") return 1;
    if (scheme == "twoscale2") return 2;
    return std::nullopt;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void sort_rows(std::vector<ErrorRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ErrorRow& a, const ErrorRow& b) {
        if (a.eps != b.eps) return a.eps < b.eps;
        if (a.dt != b.dt) return a.dt < b.dt;
        return a.n < b.n;
    });
}

std::optional<Eigen::VectorXd> load_cached(const std::filesystem::path& file,
                                           const std::string& key, Eigen::Index size) {
    std::ifstream in(file);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line) || line != key) return std::nullopt;
    Eigen::VectorXd v(size);
    for (Eigen::Index k = 0; k < size; ++k) {
        if (!std::getline(in, line)) return std::nullopt;
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), x);
        if (ec != std::errc{} || ptr != line.data() + line.size()) return std::nullopt;
        v[k] = x;
    }
    if (std::getline(in, line) && !line.empty()) return std::nullopt;
    return v;
}

void store_cached(const std::filesystem::path& file, const std::string& key,
                  const Eigen::VectorXd& v) {
    std::filesystem::create_directories(file.parent_path());
    const auto tmp = file.string() + ".tmp" +
                     std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp);
        if (!out) throw ConfigurationError("cannot write reference cache " + tmp);
        out << key << '\n';
        for (Eigen::Index k = 0; k < v.size(); ++k) out << shortest(v[k]) << '\n';
    }
    std::filesystem::rename(tmp, file);
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

Problem make_problem(const StudyConfig& cfg, int n, double eps) {
    Grid grid(n);
    const CircleLevelSet ls(cfg.radius);
    Classification cls = classify(grid, ls);
    const auto geoms = all_ghost_geometry(grid, cls, ls, GhostStencil::centered);
    const PhysicalParams params{cfg.diffusion, cfg.adsorption_length()};
    SparseOperator l = assemble_diffusion(grid, cls, geoms, params);

    SeparableVelocity velocity =
        cfg.test == TestCase::testcos
            ? testcos_velocity(grid, cls, cfg.amplitude, cfg.radius, eps)
            : testosc_velocity(grid, cls, cfg.amplitude, cfg.radius, eps);
    std::vector<SparseOperator> q;
    q.reserve(velocity.size());
    for (const auto& term : velocity.terms()) q.push_back(assemble_advection(grid, cls, term.field));

    auto ops = std::make_shared<const SchemeOperators>(std::move(l), std::move(q));
    return Problem{grid, std::move(cls), std::move(ops), std::move(velocity)};
}

Eigen::VectorXd initial_condition(const Grid& grid, const Classification& cls, double sigma,
                                  double y0) {
    if (!(sigma > 0.0)) throw ConfigurationError("sigma must be positive");
    const auto& pts = cls.active_points();
    Eigen::VectorXd c(static_cast<Eigen::Index>(pts.size()));
    const double s2 = 2.0 * sigma * sigma;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Vec2 p = grid.center(pts[k]);
        c[static_cast<Eigen::Index>(k)] = std::exp(-(p.x * p.x + (p.y - y0) * (p.y - y0)) / s2);
    }
    return c;
}

double relative_error(const Eigen::VectorXd& candidate, const Eigen::VectorXd& reference) {
    if (candidate.size() != reference.size()) {
        throw ConfigurationError("relative_error: state sizes differ");
    }
    const double denom = reference.norm();
    if (!(denom > 0.0)) throw NumericError("relative_error: reference norm is zero");
    return (reference - candidate).norm() / denom;
}

BilinearStencil bilinear_stencil(const Grid& grid, const Classification& cls, Vec2 p) {
    if (!(std::abs(p.x) <= 1.0 && std::abs(p.y) <= 1.0)) {
        throw ConfigurationError("interpolation point outside the domain");
    }
    const int n = grid.n();
    auto locate = [&](double v, int& i0, double& t) {
        const double s = (v + 1.0) / grid.h() - 0.5;
        i0 = std::clamp(static_cast<int>(std::floor(s)), 0, n - 2);
        t = s - i0;
    };
    int i0 = 0, j0 = 0;
    double tx = 0.0, ty = 0.0;
    locate(p.x, i0, tx);
    locate(p.y, j0, ty);

    BilinearStencil st;
    const GridIndex corners[4] = {{i0, j0}, {i0 + 1, j0}, {i0, j0 + 1}, {i0 + 1, j0 + 1}};
    const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
    for (int k = 0; k < 4; ++k) {
        if (!cls.is_active(corners[k])) {
            throw ConfigurationError("interpolation cell touches inactive point " +
                                     to_string(corners[k]));
        }
        st.index[k] = cls.active_index(corners[k]);
        st.weight[k] = w[k];
    }
    return st;
}

namespace {

// Cubic Lagrange weights on the nodes 0..3 at position u.
std::array<double, 4> cubic_weights(double u) {
    std::array<double, 4> w{};
    for (int m = 0; m < 4; ++m) {
        double v = 1.0;
        for (int l = 0; l < 4; ++l) {
            if (l != m) v *= (u - l) / (m - l);
        }
        w[m] = v;
    }
    return w;
}

// Sixteen-point tensor cubic stencil around p, kept inside the square. Empty when any
// node is not an Inside point.
bool cubic_stencil(const Grid& grid, const Classification& cls, Vec2 p, std::vector<int>& index,
                   std::vector<double>& weight) {
    const int n = grid.n();
    if (n < 4) return false;
    auto locate = [&](double v, int& base, std::array<double, 4>& w) {
        const double s = (v + 1.0) / grid.h() - 0.5;
        base = std::clamp(static_cast<int>(std::floor(s)) - 1, 0, n - 4);
        w = cubic_weights(s - base);
    };
    int bi = 0, bj = 0;
    std::array<double, 4> wx{}, wy{};
    locate(p.x, bi, wx);
    locate(p.y, bj, wy);
    const std::size_t start = index.size();
    for (int b = 0; b < 4; ++b) {
        for (int a = 0; a < 4; ++a) {
            const GridIndex g{bi + a, bj + b};
            if (cls.at(g) != PointClass::Inside) {
                index.resize(start);
                weight.resize(start);
                return false;
            }
            index.push_back(cls.active_index(g));
            weight.push_back(wx[a] * wy[b]);
        }
    }
    return true;
}

}  // namespace

Restriction::Restriction(const Grid& fine, const Classification& fine_cls, const Grid& coarse,
                         const Classification& coarse_cls) {
    const auto& pts = coarse_cls.active_points();
    offsets_.push_back(0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (coarse_cls.at(pts[k]) != PointClass::Inside) continue;
        const Vec2 p = coarse.center(pts[k]);
        if (!cubic_stencil(fine, fine_cls, p, index_, weight_)) {
            try {
                const BilinearStencil st = bilinear_stencil(fine, fine_cls, p);
                index_.insert(index_.end(), st.index.begin(), st.index.end());
                weight_.insert(weight_.end(), st.weight.begin(), st.weight.end());
                ++bilinear_;
            } catch (const ConfigurationError&) {
                ++skipped_;
                continue;
            }
        }
        rows_.push_back(static_cast<int>(k));
        offsets_.push_back(index_.size());
    }
}

Eigen::VectorXd Restriction::apply(const Eigen::VectorXd& fine_values) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows_.size()));
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        double v = 0.0;
        for (std::size_t m = offsets_[k]; m < offsets_[k + 1]; ++m) {
            v += weight_[m] * fine_values[index_[m]];
        }
        out[static_cast<Eigen::Index>(k)] = v;
    }
    return out;
}

Eigen::VectorXd Restriction::select(const Eigen::VectorXd& coarse_values) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows_.size()));
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        out[static_cast<Eigen::Index>(k)] = coarse_values[rows_[k]];
    }
    return out;
}

double relative_error(const Problem& candidate, const Eigen::VectorXd& c, const Problem& reference,
                      const Eigen::VectorXd& r) {
    const int nc = candidate.grid.n();
    const int nr = reference.grid.n();
    if (nc == nr) return relative_error(c, r);
    if (nc < nr) {
        const Restriction res(reference.grid, reference.cls, candidate.grid, candidate.cls);
        return relative_error(res.select(c), res.apply(r));
    }
    const Restriction res(candidate.grid, candidate.cls, reference.grid, reference.cls);
    return relative_error(res.apply(c), res.select(r));
}

Detector::Detector(const Grid& grid, const Classification& cls, Vec2 p)
    : stencil_(bilinear_stencil(grid, cls, p)) {}

double Detector::sample(const Eigen::VectorXd& values) const {
    double v = 0.0;
    for (int k = 0; k < 4; ++k) v += stencil_.weight[k] * values[stencil_.index[k]];
    return v;
}

double trace_at(const std::vector<TraceRow>& trace, double t) {
    if (trace.empty()) throw ConfigurationError("empty trace");
    const double slack = 1e-9 * std::max(1.0, std::abs(t));
    if (t < trace.front().t - slack || t > trace.back().t + slack) {
        throw ConfigurationError("trace does not cover t=" + shortest(t));
    }
    const auto it = std::lower_bound(trace.begin(), trace.end(), t,
                                     [](const TraceRow& r, double v) { return r.t < v; });
    if (it == trace.end()) return trace.back().value;
    if (it == trace.begin() || std::abs(it->t - t) <= slack) return it->value;
    const auto prev = std::prev(it);
    if (std::abs(prev->t - t) <= slack) return prev->value;
    const double w = (t - prev->t) / (it->t - prev->t);
    return (1.0 - w) * prev->value + w * it->value;
}

double max_relative_deviation(const std::vector<TraceRow>& candidate,
                              const std::vector<TraceRow>& reference) {
    double worst = 0.0;
    for (const auto& row : candidate) {
        const double r = trace_at(reference, row.t);
        if (r == 0.0) throw NumericError("reference trace vanishes at t=" + shortest(row.t));
        worst = std::max(worst, std::abs(row.value - r) / std::abs(r));
    }
    return worst;
}

SolveSettings solve_settings(const StudyConfig& cfg, bool reference) {
    SolveSettings s;
    s.method = parse_solve_method(reference ? cfg.ref_solver : cfg.solver);
    s.tolerance = cfg.tolerance;
    return s;
}

RunResult run_scheme(const StudyConfig& cfg, const Problem& problem, std::string_view scheme,
                     double dt, double t_fin, const SolveSettings& settings, bool record_trace) {
    const Eigen::VectorXd c0 =
        initial_condition(problem.grid, problem.cls, cfg.sigma, cfg.y0);
    std::optional<Detector> detector;
    if (record_trace) detector.emplace(problem.grid, problem.cls, cfg.detector);

    RunResult out;
    std::vector<Probe> probes;

    if (const auto order = twoscale_order(scheme)) {
        const SeparableVelocity& vel = problem.velocity;
        const AveragedOperator model = averaged_model(*order, *problem.ops, vel, cfg.centered);
        auto model_ops = std::make_shared<const SchemeOperators>(model.generator,
                                                                 std::vector<SparseOperator>{});
        Integrator integrator(Scheme::ua2, model_ops, zero_velocity(vel.eps()), settings);
        auto physical = [&](const StateVector& s) -> Eigen::VectorXd {
            if (*order == 1) return s.values;
            return reconstruct(s.values, *problem.ops, vel, s.time / vel.eps(), cfg.centered);
        };
        if (detector) {
            probes.push_back([&](const StateVector& s) {
                out.trace.push_back({s.time, detector->sample(physical(s))});
            });
        }
        const Eigen::VectorXd start =
            *order == 2 ? corrected_initial(c0, *problem.ops, vel, cfg.centered) : c0;
        const IntegrationResult res = integrate(integrator, {start, 0.0}, dt, t_fin, probes);
        out.state = {physical(res.state), res.state.time};
        out.steps = res.steps;
        out.dt = res.dt;
        return out;
    }

    Integrator integrator(parse_scheme(scheme), problem.ops, problem.velocity, settings);
    if (detector) {
        probes.push_back(
            [&](const StateVector& s) { out.trace.push_back({s.time, detector->sample(s.values)}); });
    }
    const IntegrationResult res = integrate(integrator, {c0, 0.0}, dt, t_fin, probes);
    out.state = res.state;
    out.steps = res.steps;
    out.dt = res.dt;
    return out;
}

std::string reference_key(const StudyConfig& cfg, double eps, int n) {
    std::ostringstream os;
    os << "oscdiff-reference-v3"
       << " test=" << test_case_name(cfg.test) << " scheme=" << cfg.ref_scheme << " N=" << n
       << " eps=" << shortest(eps) << " dt=" << shortest(cfg.dt_ref)
       << " t_fin=" << shortest(cfg.t_fin) << " D=" << shortest(cfg.diffusion)
       << " M=" << shortest(cfg.adsorption_length()) << " A=" << shortest(cfg.amplitude)
       << " sigma=" << shortest(cfg.sigma) << " y0=" << shortest(cfg.y0)
       << " R_B=" << shortest(cfg.radius) << " solver=" << cfg.ref_solver
       << " tol=" << shortest(cfg.tolerance) << " centered=" << cfg.centered;
    return os.str();
}

std::string reference_cache_name(const std::string& key) {
    char buf[17];
    const auto res = std::to_chars(buf, buf + 16, fnv1a(key), 16);
    return "ref_" + std::string(16 - (res.ptr - buf), '0') + std::string(buf, res.ptr) + ".txt";
}

Eigen::VectorXd reference_solution(const StudyConfig& cfg, const Problem& problem, double eps) {
    const std::string key = reference_key(cfg, eps, problem.grid.n());
    std::filesystem::path file;
    if (!cfg.cache_dir.empty()) {
        file = std::filesystem::path(cfg.cache_dir) / reference_cache_name(key);
        const auto n_active = static_cast<Eigen::Index>(problem.cls.n_active());
        if (auto cached = load_cached(file, key, n_active)) return *cached;
    }
    Eigen::VectorXd ref;
    try {
        ref = run_scheme(cfg, problem, cfg.ref_scheme, cfg.dt_ref, cfg.t_fin,
                         solve_settings(cfg, true))
                  .state.values;
    } catch (...) {
        rethrow_with("reference " + cell_label(eps, cfg.dt_ref, problem.grid.n()));
    }
    if (!file.empty()) store_cached(file, key, ref);
    return ref;
}

double fitted_order(const std::vector<double>& step, const std::vector<double>& error) {
    if (step.size() != error.size()) throw ConfigurationError("fitted_order: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t k = 0; k < step.size(); ++k) {
        if (!(error[k] > 0.0) || !(step[k] > 0.0)) continue;
        const double x = std::log(step[k]);
        const double y = std::log(error[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw NumericError("fitted_order: need two positive samples");
    const double denom = m * sxx - sx * sx;
    if (!(denom > 0.0)) throw NumericError("fitted_order: steps are all equal");
    return (m * sxy - sx * sy) / denom;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::size_t first_index = count;
    std::mutex mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < count && !failed; k = next++) {
                    try {
                        fn(k);
                    } catch (...) {
                        std::lock_guard lock(mutex);
                        failed = true;
                        if (k < first_index) {
                            first_index = k;
                            first = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (first) std::rethrow_exception(first);
}

ConvergenceStudy time_convergence(const StudyConfig& cfg) {
    validate(cfg);
    const auto eps_list = sorted_unique(cfg.eps);
    const auto dt_list = sorted_unique(cfg.dt);
    std::vector<std::vector<ErrorRow>> per_eps(eps_list.size());

    parallel_for(eps_list.size(), cfg.threads, [&](std::size_t e) {
        const double eps = eps_list[e];
        const Problem ref_problem = make_problem(cfg, cfg.n_ref, eps);
        const Eigen::VectorXd ref = reference_solution(cfg, ref_problem, eps);
        const Problem problem =
            cfg.n == cfg.n_ref ? ref_problem : make_problem(cfg, cfg.n, eps);
        for (double dt : dt_list) {
            try {
                const RunResult run =
                    run_scheme(cfg, problem, cfg.scheme, dt, cfg.t_fin, solve_settings(cfg, false));
                per_eps[e].push_back(
                    {eps, dt, cfg.n, relative_error(problem, run.state.values, ref_problem, ref)});
            } catch (...) {
                rethrow_with(cfg.scheme + " " + cell_label(eps, dt, cfg.n));
            }
        }
    });

    ConvergenceStudy study;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        std::vector<double> steps, errors;
        for (const auto& r : per_eps[e]) {
            steps.push_back(r.dt);
            errors.push_back(r.error);
            study.rows.push_back(r);
        }
        study.orders.push_back({eps_list[e], dt_list.size() > 1 ? fitted_order(steps, errors) : 0.0});
    }
    sort_rows(study.rows);
    return study;
}

ConvergenceStudy space_convergence(const StudyConfig& cfg) {
    validate(cfg);
    const auto eps_list = sorted_unique(cfg.eps);
    std::vector<int> n_list = cfg.n_list;
    std::sort(n_list.begin(), n_list.end());
    n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
    const double dt = cfg.dt.front();

    // One task per (eps, N) cell plus the references; references first.
    std::vector<Eigen::VectorXd> refs(eps_list.size());
    std::vector<std::optional<Problem>> ref_problems(eps_list.size());
    parallel_for(eps_list.size(), cfg.threads, [&](std::size_t e) {
        ref_problems[e].emplace(make_problem(cfg, cfg.n_ref, eps_list[e]));
        refs[e] = reference_solution(cfg, *ref_problems[e], eps_list[e]);
    });

    const std::size_t cells = eps_list.size() * n_list.size();
    std::vector<ErrorRow> rows(cells);
    parallel_for(cells, cfg.threads, [&](std::size_t c) {
        const std::size_t e = c / n_list.size();
        const int n = n_list[c % n_list.size()];
        const double eps = eps_list[e];
        try {
            const Problem problem = make_problem(cfg, n, eps);
            const RunResult run =
                run_scheme(cfg, problem, cfg.scheme, dt, cfg.t_fin, solve_settings(cfg, false));
            rows[c] = {eps, dt, n, relative_error(problem, run.state.values, *ref_problems[e], refs[e])};
        } catch (...) {
            rethrow_with(cfg.scheme + " " + cell_label(eps, dt, n));
        }
    });

    ConvergenceStudy study;
    study.rows = rows;
    for (std::size_t e = 0; e < eps_list.size(); ++e) {
        std::vector<double> h, err;
        for (std::size_t k = 0; k < n_list.size(); ++k) {
            const auto& r = rows[e * n_list.size() + k];
            h.push_back(Grid::kLength / r.n);
            err.push_back(r.error);
        }
        study.orders.push_back({eps_list[e], n_list.size() > 1 ? fitted_order(h, err) : 0.0});
    }
    sort_rows(study.rows);
    return study;
}

std::vector<std::pair<double, double>> uniformity_ratios(const std::vector<ErrorRow>& rows) {
    std::map<double, std::pair<double, double>> range;
    for (const auto& r : rows) {
        auto [it, fresh] = range.try_emplace(r.dt, r.error, r.error);
        if (!fresh) {
            it->second.first = std::min(it->second.first, r.error);
            it->second.second = std::max(it->second.second, r.error);
        }
    }
    std::vector<std::pair<double, double>> out;
    for (const auto& [dt, mm] : range) {
        if (!(mm.first > 0.0)) throw NumericError("uniformity ratio: zero error at dt=" + shortest(dt));
        out.emplace_back(dt, mm.second / mm.first);
    }
    return out;
}

TraceComparison compare_cn(const StudyConfig& cfg) {
    validate(cfg);
    const double eps = cfg.eps.front();
    const double dt = cfg.dt.front();
    const Problem problem = make_problem(cfg, cfg.n, eps);

    TraceComparison cmp;
    std::array<std::vector<TraceRow>*, 3> slots{&cmp.reference, &cmp.ua2, &cmp.cn};
    parallel_for(3, cfg.threads, [&](std::size_t k) {
        const bool ref = k == 0;
        const std::string scheme = ref ? cfg.ref_scheme : (k == 1 ? "ua2" : "cn");
        const double step = ref ? cfg.dt_ref : dt;
        try {
            *slots[k] = run_scheme(cfg, problem, scheme, step, cfg.t_fin, solve_settings(cfg, ref), true)
                            .trace;
        } catch (...) {
            rethrow_with(scheme + " " + cell_label(eps, step, cfg.n));
        }
    });
    cmp.ua2_deviation = max_relative_deviation(cmp.ua2, cmp.reference);
    cmp.cn_deviation = max_relative_deviation(cmp.cn, cmp.reference);
    return cmp;
}

std::vector<AsymptoticRow> twoscale_study(const StudyConfig& cfg, const std::vector<int>& orders) {
    validate(cfg);
    const auto eps_list = sorted_unique(cfg.eps);
    const std::size_t cells = eps_list.size() * orders.size();
    std::vector<Eigen::VectorXd> refs(eps_list.size());
    std::vector<std::optional<Problem>> problems(eps_list.size());
    parallel_for(eps_list.size(), cfg.threads, [&](std::size_t e) {
        problems[e].emplace(make_problem(cfg, cfg.n, eps_list[e]));
        refs[e] = reference_solution(cfg, *problems[e], eps_list[e]);
    });

    std::vector<AsymptoticRow> rows(cells);
    parallel_for(cells, cfg.threads, [&](std::size_t c) {
        const std::size_t e = c / orders.size();
        const int order = orders[c % orders.size()];
        const std::string scheme = "twoscale" + std::to_string(order);
        try {
            const RunResult run = run_scheme(cfg, *problems[e], scheme, cfg.dt.front(), cfg.t_fin,
                                             solve_settings(cfg, false));
            rows[c] = {eps_list[e], order, relative_error(run.state.values, refs[e])};
        } catch (...) {
            rethrow_with(scheme + " " + cell_label(eps_list[e], cfg.dt.front(), cfg.n));
        }
    });
    return rows;
}

Eigen::VectorXd dense_oracle(const Problem& problem, const Eigen::VectorXd& c0, double t_fin,
                             double dt_sub) {
    if (problem.grid.n() > 40) throw ConfigurationError("dense oracle requires N <= 40");
    const SeparableVelocity& vel = problem.velocity;
    if (!(dt_sub > 0.0) || (vel.size() > 0 && dt_sub > vel.eps() / 50.0 * (1.0 + 1e-12))) {
        throw ConfigurationError("dense oracle requires 0 < dt_sub <= eps/50");
    }
    const Eigen::MatrixXd l(problem.ops->diffusion());
    std::vector<Eigen::MatrixXd> q;
    for (const auto& op : problem.ops->advection()) q.emplace_back(op);

    auto rhs = [&](double t, const Eigen::VectorXd& c) {
        Eigen::VectorXd out = l * c;
        const auto g = vel.profile_values(t);
        for (std::size_t k = 0; k < q.size(); ++k) out.noalias() += g[k] * (q[k] * c);
        return out;
    };

    const long steps = std::max(1L, static_cast<long>(std::ceil(t_fin / dt_sub - 1e-9)));
    const double h = t_fin / static_cast<double>(steps);
    Eigen::VectorXd c = c0;
    for (long s = 0; s < steps; ++s) {
        const double t = s * h;
        const Eigen::VectorXd k1 = rhs(t, c);
        const Eigen::VectorXd k2 = rhs(t + 0.5 * h, c + 0.5 * h * k1);
        const Eigen::VectorXd k3 = rhs(t + 0.5 * h, c + 0.5 * h * k2);
        const Eigen::VectorXd k4 = rhs(t + h, c + h * k3);
        c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double nrm = c.norm();
        if (!(nrm <= 1e6)) {
            throw NumericError("dense oracle unstable at t=" + shortest(t + h) +
                               "; reduce dt_sub");
        }
    }
    return c;
}

std::vector<ErrorRow> oracle_study(const StudyConfig& cfg) {
    validate(cfg);
    const auto eps_list = sorted_unique(cfg.eps);
    const auto dt_list = sorted_unique(cfg.dt);
    std::vector<std::vector<ErrorRow>> per_eps(eps_list.size());
    parallel_for(eps_list.size(), cfg.threads, [&](std::size_t e) {
        const double eps = eps_list[e];
        const Problem problem = make_problem(cfg, cfg.n, eps);
        const Eigen::VectorXd c0 = initial_condition(problem.grid, problem.cls, cfg.sigma, cfg.y0);
        const double dt_sub = cfg.dt_sub > 0.0 ? cfg.dt_sub : eps / 100.0;
        Eigen::VectorXd truth;
        try {
            truth = dense_oracle(problem, c0, cfg.t_fin, dt_sub);
        } catch (...) {
            rethrow_with("oracle " + cell_label(eps, dt_sub, cfg.n));
        }
        for (double dt : dt_list) {
            try {
                const RunResult run =
                    run_scheme(cfg, problem, cfg.scheme, dt, cfg.t_fin, solve_settings(cfg, false));
                per_eps[e].push_back({eps, dt, cfg.n, relative_error(run.state.values, truth)});
            } catch (...) {
                rethrow_with(cfg.scheme + " " + cell_label(eps, dt, cfg.n));
            }
        }
    });
    std::vector<ErrorRow> rows;
    for (auto& v : per_eps) rows.insert(rows.end(), v.begin(), v.end());
    sort_rows(rows);
    return rows;
}

}  // namespace oscdiff
