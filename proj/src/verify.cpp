#include "fcvi/verify.hpp"

#include <cstdlib>
#include <sstream>

#include "fcvi/engine.hpp"
#include "fcvi/transform.hpp"

namespace fcvi::verify {

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.gaussian();
    return v;
}

struct Shape {
    std::size_t m, segments, d_star;
};

Shape random_shape(Rng& rng) {
    std::size_t m = 1 + std::size_t(rng.index(8));
    std::size_t max_segments = std::min<std::size_t>(16, 128 / m);
    std::size_t segments = 1 + std::size_t(rng.index(max_segments));
    return {m, segments, m * segments};
}

SuiteResult check_preservation(std::uint64_t seed, std::size_t trials) {
    SuiteResult res{"distance_preservation", trials, true, ""};
    Rng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        auto sh = random_shape(rng);
        auto va = random_vec(rng, sh.d_star);
        auto vb = random_vec(rng, sh.d_star);
        auto f = random_vec(rng, sh.m);
        double alpha = rng.uniform(1.0, 4.0);
        auto pa = psi_partition(va, f, alpha);
        auto pb = psi_partition(vb, f, alpha);
        double dv = l2(std::span<const double>(va), std::span<const double>(vb));
        double dt = l2(std::span<const double>(pa), std::span<const double>(pb));
        if (std::abs(dt - dv) > 1e-9 * std::max(1.0, dv)) {
            res.passed = false;
            std::ostringstream os;
            os << "trial " << t << ": |" << dt << " - " << dv << "| exceeds 1e-9 relative";
            res.detail = os.str();
            break;
        }
    }
    return res;
}

SuiteResult check_expansion(std::uint64_t seed, std::size_t trials) {
    SuiteResult res{"expansion_identity", trials, true, ""};
    Rng rng(seed + 1);
    for (std::size_t t = 0; t < trials; ++t) {
        auto sh = random_shape(rng);
        auto va = random_vec(rng, sh.d_star);
        auto vb = random_vec(rng, sh.d_star);
        auto fa = random_vec(rng, sh.m);
        auto fb = random_vec(rng, sh.m);
        double alpha = rng.uniform(1.0, 4.0);
        auto pa = psi_partition(va, fa, alpha);
        auto pb = psi_partition(vb, fb, alpha);
        double lhs = l2_sq(std::span<const double>(pa), std::span<const double>(pb));

        std::vector<double> df(sh.m);
        for (std::size_t j = 0; j < sh.m; ++j) df[j] = fa[j] - fb[j];
        double dv2 = 0.0, cross = 0.0, df2 = norm_sq(df);
        for (std::size_t i = 0; i < sh.d_star; ++i) {
            double dvi = va[i] - vb[i];
            dv2 += dvi * dvi;
            cross += dvi * df[i % sh.m];
        }
        double rhs = dv2 + double(sh.segments) * alpha * alpha * df2 - 2.0 * alpha * cross;
        double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
        if (std::abs(lhs - rhs) > 1e-6 * scale) {
            res.passed = false;
            std::ostringstream os;
            os << "trial " << t << ": expansion mismatch " << lhs << " vs " << rhs;
            res.detail = os.str();
            break;
        }
    }
    return res;
}

struct SeparationCase {
    Matrix points_a, points_b;  // d_star wide
    std::vector<double> fa, fb;
    double alpha_star;
    std::size_t d_star, m;
};

SeparationCase make_separation_case(Rng& rng) {
    SeparationCase sc;
    sc.m = 2 + std::size_t(rng.index(7));
    std::size_t segments = 2 + std::size_t(rng.index(std::min<std::size_t>(15, 128 / sc.m - 1)));
    sc.d_star = segments * sc.m;
    double diameter = rng.uniform(0.2, 2.0);
    double margin = rng.uniform(1.05, 3.0);
    double gap = margin * 2.0 * diameter / double(segments);

    sc.fa = random_vec(rng, sc.m);
    auto dir = random_vec(rng, sc.m);
    double norm = std::sqrt(norm_sq(dir));
    sc.fb = sc.fa;
    for (std::size_t j = 0; j < sc.m; ++j) sc.fb[j] += gap * dir[j] / norm;

    // worst case: both vector clusters share one center
    auto center = random_vec(rng, sc.d_star);
    auto fill = [&](Matrix& pts) {
        pts = Matrix(10, sc.d_star);
        for (std::size_t i = 0; i < pts.rows; ++i) {
            auto u = random_vec(rng, sc.d_star);
            double un = std::sqrt(norm_sq(u));
            double r = rng.uniform01() * diameter / 2.0;
            for (std::size_t j = 0; j < sc.d_star; ++j)
                pts.at(i, j) = center[j] + r * u[j] / un;
        }
    };
    fill(sc.points_a);
    fill(sc.points_b);
    sc.alpha_star = separation_alpha(diameter, gap, sc.d_star, sc.m);
    return sc;
}

double separation_ratio(const SeparationCase& sc, double alpha) {
    auto transform = [&](const Matrix& pts, const std::vector<double>& f) {
        Matrix out(pts.rows, sc.d_star);
        for (std::size_t i = 0; i < pts.rows; ++i) {
            auto t = psi_partition(pts.row(i), f, alpha);
            std::copy(t.begin(), t.end(), out.row(i).begin());
        }
        return out;
    };
    Matrix ta = transform(sc.points_a, sc.fa);
    Matrix tb = transform(sc.points_b, sc.fb);

    double max_intra = 0.0;
    for (const Matrix* mp : {&ta, &tb})
        for (std::size_t i = 0; i < mp->rows; ++i)
            for (std::size_t j = i + 1; j < mp->rows; ++j)
                max_intra = std::max(max_intra, l2(mp->row(i), mp->row(j)));
    double min_inter = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ta.rows; ++i)
        for (std::size_t j = 0; j < tb.rows; ++j)
            min_inter = std::min(min_inter, l2(ta.row(i), tb.row(j)));
    return min_inter / std::max(max_intra, 1e-300);
}

SuiteResult check_separation(std::uint64_t seed, std::size_t cases) {
    SuiteResult res{"cluster_separation", cases, true, ""};
    Rng rng(seed + 2);
    for (std::size_t t = 0; t < cases; ++t) {
        auto sc = make_separation_case(rng);
        double base_alpha = 2.0 * sc.alpha_star;
        if (separation_ratio(sc, base_alpha) <= 1.0) {
            res.passed = false;
            res.detail = "case " + std::to_string(t) + ": clusters not separated at alpha=2*alpha*";
            break;
        }
        double prev = 0.0;
        bool monotone = true;
        for (double mult : {1.0, 1.5, 2.0, 2.5, 3.0}) {
            double ratio = separation_ratio(sc, base_alpha * mult);
            if (ratio + 1e-9 < prev) monotone = false;
            prev = ratio;
        }
        if (!monotone) {
            res.passed = false;
            res.detail = "case " + std::to_string(t) + ": separation ratio not monotone in alpha";
            break;
        }
    }
    return res;
}

SuiteResult check_k_prime() {
    SuiteResult res{"k_prime_rules", 0, true, ""};
    auto expect = [&](std::size_t got, std::size_t want, const char* what) {
        if (got != want && res.passed) {
            res.passed = false;
            res.detail = std::string(what) + ": got " + std::to_string(got) + ", want " +
                         std::to_string(want);
        }
    };
    expect(compute_k_prime(10, 1.0, 1.0, 1.0, 1000), 10, "identity case");
    expect(compute_k_prime(10, 0.5, 1.0, 2.0, 1000), 40, "formula case");
    expect(compute_k_prime(10, 0.1, 2.0, 1.0, 20), 20, "cap case");
    res.trials += 3;

    const double lambdas[] = {0.1, 0.25, 0.5, 0.75, 1.0};
    const std::size_t ks[] = {1, 5, 10, 50, 100};
    const double alphas[] = {1.0, 2.0};
    const double cs[] = {1.0, 4.0};
    for (std::size_t k : ks)
        for (double lam : lambdas)
            for (double a : alphas)
                for (double c : cs) {
                    ++res.trials;
                    std::size_t base = compute_k_prime(k, lam, a, c, 1000000);
                    if (compute_k_prime(k, lam, a * 2.0, c, 1000000) > base ||
                        compute_k_prime(k, std::min(1.0, lam * 2.0), a, c, 1000000) > base ||
                        compute_k_prime(k + 1, lam, a, c, 1000000) < base ||
                        compute_k_prime(k, lam, a, c * 2.0, 1000000) < base) {
                        if (res.passed) {
                            res.passed = false;
                            res.detail = "monotonicity violated at k=" + std::to_string(k);
                        }
                    }
                }
    return res;
}

SuiteResult check_optimal_alpha() {
    SuiteResult res{"optimal_alpha_rules", 3, true, ""};
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
    if (!near(optimal_alpha(0.5), 1.0) || !near(optimal_alpha(0.2), 2.0) ||
        !near(optimal_alpha(0.9), 1.0)) {
        res.passed = false;
        res.detail = "formula values incorrect";
    }
    bool threw = false;
    try {
        (void)optimal_alpha(0.0);
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    if (!threw) {
        res.passed = false;
        res.detail = "lambda=0 must be rejected";
    }
    return res;
}

}  // namespace

std::vector<SuiteResult> run_all(std::uint64_t seed, std::size_t trials) {
    if (trials == 0) throw UsageError("trials must be >= 1");
    std::vector<SuiteResult> out;
    out.push_back(check_preservation(seed, trials));
    out.push_back(check_expansion(seed, trials));
    out.push_back(check_separation(seed, std::max<std::size_t>(5, trials / 200)));
    out.push_back(check_k_prime());
    out.push_back(check_optimal_alpha());
    const char* fault = std::getenv("FCVI_VERIFY_FAULT");
    if (fault && std::string(fault) == "1") {
        out.push_back({"injected_fault", 1, false, "fault injection requested"});
    }
    return out;
}

}  // namespace fcvi::verify
