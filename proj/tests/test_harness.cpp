#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oscdiff/config.hpp"
#include "oscdiff/csv.hpp"
#include "oscdiff/errors.hpp"
#include "oscdiff/study.hpp"

using namespace oscdiff;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("oscdiff_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Eigen::VectorXd sample_linear(const Grid& g, const Classification& cls, double a, double b,
                              double c) {
    const auto& pts = cls.active_points();
    Eigen::VectorXd v(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const Vec2 p = g.center(pts[k]);
        v[static_cast<Eigen::Index>(k)] = a + b * p.x + c * p.y;
    }
    return v;
}

template <class Reader>
auto read_file(Reader reader, const fs::path& path) {
    std::ifstream in(path);
    return reader(in);
}

StudyConfig tiny() {
    StudyConfig cfg;
    cfg.n = 20;
    cfg.n_ref = 20;
    cfg.y0 = -0.5;
    cfg.t_fin = 0.02;
    cfg.dt_ref = 1e-3;
    cfg.eps = {1e-2};
    cfg.dt = {1e-2, 5e-3};
    cfg.threads = 1;
    return cfg;
}

}  // namespace

TEST_CASE("configuration text round-trips") {
    StudyConfig cfg;
    cfg.test = TestCase::testosc;
    cfg.scheme = "ua1";
    cfg.eps = {1.0, 1e-3, 2.5e-7};
    cfg.dt = {0.01, 0.005};
    cfg.n_list = {20, 40};
    cfg.adsorption = 0.0123;
    cfg.detector = {0.1, -0.45};
    cfg.centered = false;
    cfg.cache_dir = "/tmp/somewhere";
    const std::string text = to_text(cfg);
    const StudyConfig back = parse_config(text);
    CHECK(to_text(back) == text);
    CHECK(back.eps == cfg.eps);
    CHECK(back.adsorption.value() == 0.0123);
    CHECK(back.detector.y == -0.45);
    CHECK(!back.centered);
}

TEST_CASE("configuration parsing: comments, overrides and errors") {
    const StudyConfig cfg = parse_config("# header\nN = 40   # trailing\n\neps = 1,1e-2\nP = 0,-0.25\n");
    CHECK(cfg.n == 40);
    CHECK(cfg.eps == std::vector<double>{1.0, 1e-2});
    CHECK(cfg.detector.y == -0.25);

    StudyConfig over = cfg;
    set_config_value(over, "dt", "0.5,0.25");
    CHECK(over.dt == std::vector<double>{0.5, 0.25});

    CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigurationError);
    CHECK_THROWS_AS(parse_config("N = forty\n"), ConfigurationError);
    CHECK_THROWS_AS(parse_config("N 40\n"), ConfigurationError);
    CHECK_THROWS_AS(parse_config("P = 1\n"), ConfigurationError);
    CHECK_THROWS_AS(parse_config("centered = maybe\n"), ConfigurationError);
    CHECK_THROWS_AS(parse_config("test = testsin\n"), ConfigurationError);
    CHECK_THROWS_AS(load_config("/nonexistent/oscdiff.cfg"), ConfigurationError);

    StudyConfig bad;
    bad.dt = {};
    CHECK_THROWS_AS(validate(bad), ConfigurationError);
    bad = StudyConfig{};
    bad.eps = {-1.0};
    CHECK_THROWS_AS(validate(bad), ConfigurationError);
    CHECK_NOTHROW(validate(StudyConfig{}));
}

TEST_CASE("every documented key is accepted") {
    for (const auto& key : StudyConfig::keys()) {
        CAPTURE(key);
        StudyConfig cfg;
        std::string text = to_text(cfg);
        CHECK(text.find(key + " = ") != std::string::npos);
    }
}

TEST_CASE("adsorption length: explicit value or Lennard-Jones integral") {
    StudyConfig cfg;
    cfg.delta = 1e-3;
    const double derived = cfg.adsorption_length();
    CHECK(derived > 0.0);
    cfg.delta = 2e-3;
    CHECK(cfg.adsorption_length() == doctest::Approx(2 * derived));
    cfg.adsorption = 0.5;
    CHECK(cfg.adsorption_length() == 0.5);
}

TEST_CASE("CSV tables round-trip with full precision") {
    const fs::path dir = scratch_dir("csv");
    const std::vector<ErrorRow> errors{{1e-2, 0.1 / 3, 80, 1.2345678901234567e-5},
                                       {1.0, 2.5e-3, 160, 7e-9}};
    save_csv((dir / "nested" / "err.csv").string(), errors);
    const auto back = read_file(read_error_csv, dir / "nested" / "err.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].dt == errors[0].dt);
    CHECK(back[0].error == errors[0].error);
    CHECK(back[1].n == 160);

    const std::vector<TraceRow> trace{{0.0, 1.0}, {0.1, std::nextafter(0.5, 1.0)}};
    save_csv((dir / "trace.csv").string(), trace);
    const auto tb = read_file(read_trace_csv, dir / "trace.csv");
    REQUIRE(tb.size() == 2);
    CHECK(tb[1].value == trace[1].value);

    const std::vector<AsymptoticRow> asym{{1e-3, 2, 4.5e-7}};
    save_csv((dir / "asym.csv").string(), asym);
    const auto ab = read_file(read_asymptotic_csv, dir / "asym.csv");
    REQUIRE(ab.size() == 1);
    CHECK(ab[0].order == 2);

    std::ostringstream os;
    write_csv(os, errors);
    CHECK(os.str().rfind("eps,dt,N,error\n", 0) == 0);

    std::ofstream(dir / "wrong.csv") << "t,val\n0,1\n";
    CHECK_THROWS_AS(read_file(read_trace_csv, dir / "wrong.csv"), ConfigurationError);
    CHECK_THROWS_AS(read_file(read_error_csv, dir / "trace.csv"), ConfigurationError);
}

TEST_CASE("initial condition is the Gaussian at every active point") {
    const Grid g(20);
    const auto cls = classify(g, CircleLevelSet(0.2));
    const auto c = initial_condition(g, cls, 0.2, -0.5);
    REQUIRE(c.size() == static_cast<Eigen::Index>(cls.n_active()));
    for (std::size_t k = 0; k < cls.active_points().size(); k += 37) {
        const Vec2 p = g.center(cls.active_points()[k]);
        CHECK(c[static_cast<Eigen::Index>(k)] ==
              doctest::Approx(std::exp(-(p.x * p.x + (p.y + 0.5) * (p.y + 0.5)) / 0.08)));
    }
    CHECK_THROWS_AS(initial_condition(g, cls, 0.0, 0.0), ConfigurationError);
}

TEST_CASE("relative error") {
    Eigen::VectorXd r(3);
    r << 3.0, 4.0, 0.0;
    Eigen::VectorXd c(3);
    c << 3.0, 4.0, 0.5;
    CHECK(relative_error(c, r) == doctest::Approx(0.1));
    CHECK(relative_error(r, r) == 0.0);
    CHECK_THROWS_AS(relative_error(c, Eigen::VectorXd::Zero(3)), NumericError);
    CHECK_THROWS_AS(relative_error(c, Eigen::VectorXd::Ones(2)), ConfigurationError);
}

TEST_CASE("detector and restriction reproduce linear functions") {
    const Grid fine(80);
    const auto fine_cls = classify(fine, CircleLevelSet(0.2));
    const Grid coarse(20);
    const auto coarse_cls = classify(coarse, CircleLevelSet(0.2));
    const auto f = sample_linear(fine, fine_cls, 0.3, -1.2, 2.5);
    const auto c = sample_linear(coarse, coarse_cls, 0.3, -1.2, 2.5);

    const Detector det(fine, fine_cls, {0.0, -0.5});
    CHECK(det.sample(f) == doctest::Approx(0.3 - 1.25));
    const Detector off_center(fine, fine_cls, {0.017, 0.83});
    CHECK(off_center.sample(f) == doctest::Approx(0.3 - 1.2 * 0.017 + 2.5 * 0.83));

    const Restriction res(fine, fine_cls, coarse, coarse_cls);
    CHECK(res.coarse_rows().size() + res.skipped() == coarse_cls.n_inside());
    CHECK(res.skipped() < 8);
    const Eigen::VectorXd rf = res.apply(f);
    const Eigen::VectorXd rc = res.select(c);
    CHECK((rf - rc).norm() <= 1e-12 * rc.norm());

    CHECK_THROWS_AS(Detector(fine, fine_cls, {0.0, 0.0}), ConfigurationError);
    CHECK_THROWS_AS(Detector(fine, fine_cls, {1.5, 0.0}), ConfigurationError);
}

TEST_CASE("cross-grid relative error vanishes for a shared linear field") {
    StudyConfig cfg;
    const Problem a = make_problem(cfg, 20, 1e-2);
    const Problem b = make_problem(cfg, 40, 1e-2);
    const auto fa = sample_linear(a.grid, a.cls, 2.0, 0.1, 0.2);
    const auto fb = sample_linear(b.grid, b.cls, 2.0, 0.1, 0.2);
    CHECK(relative_error(a, fa, b, fb) < 1e-13);
    CHECK(relative_error(b, fb, a, fa) < 1e-13);
    CHECK(relative_error(a, fa, a, fa) == 0.0);
}

TEST_CASE("trace interpolation and deviation") {
    const std::vector<TraceRow> ref{{0.0, 1.0}, {1.0, 3.0}, {2.0, 2.0}};
    CHECK(trace_at(ref, 0.5) == doctest::Approx(2.0));
    CHECK(trace_at(ref, 2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(trace_at(ref, 2.5), ConfigurationError);
    const std::vector<TraceRow> cand{{0.5, 2.2}, {1.5, 2.5}};
    CHECK(max_relative_deviation(cand, ref) == doctest::Approx(0.1));
}

TEST_CASE("least-squares order of synthetic power laws") {
    std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
    std::vector<double> e;
    for (double x : h) e.push_back(3.0 * x * x);
    CHECK(fitted_order(h, e) == doctest::Approx(2.0));
    e = {1.0, 0.5, 0.25, 0.125};
    CHECK(fitted_order(h, e) == doctest::Approx(1.0));
    CHECK_THROWS_AS(fitted_order({0.1}, {0.2}), NumericError);
    CHECK_THROWS_AS(fitted_order({0.1, 0.1}, {0.2, 0.3}), NumericError);
    CHECK_THROWS_AS(fitted_order({0.1, 0.2}, {0.2}), ConfigurationError);
}

TEST_CASE("uniformity ratios are max over min across eps at each dt") {
    const std::vector<ErrorRow> rows{{1.0, 0.1, 20, 2e-3}, {1e-2, 0.1, 20, 1e-3},
                                     {1.0, 0.05, 20, 4e-4}, {1e-2, 0.05, 20, 5e-4}};
    const auto r = uniformity_ratios(rows);
    REQUIRE(r.size() == 2);
    CHECK(r[0].first == 0.05);
    CHECK(r[0].second == doctest::Approx(1.25));
    CHECK(r[1].second == doctest::Approx(2.0));
}

TEST_CASE("reference cache: reuse, key check and distinct names") {
    StudyConfig cfg = tiny();
    const fs::path dir = scratch_dir("cache");
    cfg.cache_dir = dir.string();
    const Problem p = make_problem(cfg, cfg.n_ref, 1e-2);
    const Eigen::VectorXd first = reference_solution(cfg, p, 1e-2);
    REQUIRE(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
    const fs::path file = dir / reference_cache_name(reference_key(cfg, 1e-2, cfg.n_ref));
    REQUIRE(fs::exists(file));

    const Eigen::VectorXd second = reference_solution(cfg, p, 1e-2);
    CHECK(second == first);

    // A file whose stored key disagrees is ignored and rewritten.
    { std::ofstream(file) << "something else\n1\n"; }
    const Eigen::VectorXd third = reference_solution(cfg, p, 1e-2);
    CHECK(third == first);

    StudyConfig other = cfg;
    other.dt_ref = 5e-4;
    CHECK(reference_key(other, 1e-2, cfg.n_ref) != reference_key(cfg, 1e-2, cfg.n_ref));
    CHECK(reference_key(cfg, 1e-3, cfg.n_ref) != reference_key(cfg, 1e-2, cfg.n_ref));
    CHECK(reference_cache_name("a") != reference_cache_name("b"));
    CHECK(reference_cache_name("a").size() == std::string("ref_0123456789abcdef.txt").size());
}

TEST_CASE("runs are deterministic and thread count does not change results") {
    StudyConfig cfg = tiny();
    cfg.eps = {1e-1, 1e-2};
    const auto one = time_convergence(cfg);
    cfg.threads = 3;
    const auto three = time_convergence(cfg);
    REQUIRE(one.rows.size() == 4);
    REQUIRE(three.rows.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(one.rows[k].error == three.rows[k].error);
    CHECK(one.orders.size() == 2);
}

TEST_CASE("two-scale runs reproduce the initial condition at t = 0") {
    StudyConfig cfg = tiny();
    cfg.test = TestCase::testosc;
    const Problem p = make_problem(cfg, cfg.n, 1e-2);
    const Eigen::VectorXd c0 = initial_condition(p.grid, p.cls, cfg.sigma, cfg.y0);
    for (const char* scheme : {"twoscale1", "twoscale2"}) {
        for (bool centered : {true, false}) {
            cfg.centered = centered;
            const auto run = run_scheme(cfg, p, scheme, 1e-3, 0.0, solve_settings(cfg, false));
            CHECK(relative_error(run.state.values, c0) < 1e-3);
        }
    }
    CHECK_THROWS_AS(run_scheme(cfg, p, "euler", 1e-3, 0.01, solve_settings(cfg, false)),
                    ConfigurationError);
}

TEST_CASE("dense oracle converges under sub-step halving") {
    StudyConfig cfg = tiny();
    const double eps = 0.1;
    const Problem p = make_problem(cfg, 20, eps);
    const Eigen::VectorXd c0 = initial_condition(p.grid, p.cls, cfg.sigma, cfg.y0);
    const Eigen::VectorXd a = dense_oracle(p, c0, 0.05, eps / 100);
    const Eigen::VectorXd b = dense_oracle(p, c0, 0.05, eps / 200);
    CHECK(relative_error(a, b) < 1e-10);

    CHECK_THROWS_AS(dense_oracle(p, c0, 0.05, eps / 10), ConfigurationError);
    const Problem big = make_problem(cfg, 80, eps);
    CHECK_THROWS_AS(dense_oracle(big, initial_condition(big.grid, big.cls, 0.2, 0.0), 0.05,
                                 eps / 100),
                    ConfigurationError);
}

TEST_CASE("UA2 agrees with the dense oracle on a short run") {
    StudyConfig cfg = tiny();
    const double eps = 0.05;
    const Problem p = make_problem(cfg, 20, eps);
    const Eigen::VectorXd c0 = initial_condition(p.grid, p.cls, cfg.sigma, cfg.y0);
    const Eigen::VectorXd exact = dense_oracle(p, c0, 0.04, eps / 100);
    SolveSettings s;
    const auto e1 = relative_error(run_scheme(cfg, p, "ua2", 0.01, 0.04, s).state.values, exact);
    const auto e2 = relative_error(run_scheme(cfg, p, "ua2", 0.005, 0.04, s).state.values, exact);
    CHECK(e1 < 1e-3);
    CHECK(std::log2(e1 / e2) > 1.7);
}

TEST_CASE("parallel_for covers every index and propagates failures") {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(hits.size(), 4, [&](std::size_t k) { hits[k]++; });
    for (auto& h : hits) CHECK(h.load() == 1);

    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t k) {
                                     if (k == 6) throw NumericError("boom");
                                 }),
                    NumericError);
    CHECK_NOTHROW(parallel_for(0, 2, [](std::size_t) {}));
}
