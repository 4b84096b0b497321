// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "har/eval.hpp"
#include "har/features.hpp"
#include "har/fft.hpp"
#include "har/gbt.hpp"
#include "har/manifest.hpp"
#include "har/metrics.hpp"
#include "har/mlp.hpp"
#include "har/parallel.hpp"
#include "har/model.hpp"
#include "har/preprocess.hpp"
#include "har/report.hpp"
#include "har/segment.hpp"
#include "har/svm.hpp"
#include "har/synth.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace har;

namespace {

const fs::path kWork = fs::temp_directory_path() / "har_acceptance";
int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void criterion(const char* name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        auto [ok, detail] = body();
        report(name, ok, detail);
    } catch (const std::exception& e) {
        report(name, false, std::string("exception: ") + e.what());
    }
}

int cli(const std::string& args) {
    const std::string cmd = std::string(HAR_CLI) + " " + args + " > " + (kWork / "cli_stdout.txt").string() + " 2> " +
                            (kWork / "cli_stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<ScenarioResult> load_results(const fs::path& bundle) { return results_from_json(slurp(bundle / "results.json")); }

}  // namespace

int main() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);

    criterion("reference-accuracy-statement", [] {
        const std::string readme = slurp(HAR_README);
        const bool ok = readme.find("cannot be reproduced") != std::string::npos &&
                        readme.find("94.60") != std::string::npos;
        return std::pair{ok, std::string("README documents that the reference accuracies are not reproducible")};
    });

    criterion("end-to-end-synthetic", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const fs::path data = kWork / "data", feats = kWork / "features.csv", bundle = kWork / "e2e";
        if (cli("synth --seed 42 --out " + data.string()) != 0) return std::pair{false, std::string("synth failed")};
        if (cli("extract --seed 42 --data " + data.string() + " --out " + feats.string()) != 0) {
            return std::pair{false, std::string("extract failed")};
        }
        if (cli("evaluate --seed 42 --scenario fast_bag_normal --features " + feats.string() + " --out " + bundle.string()) != 0) {
            return std::pair{false, std::string("evaluate failed")};
        }
        const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
        const auto results = load_results(bundle);
        double worst_soft = 1.0;
        std::string detail;
        for (const auto& v : results.at(0).variants) {
            const double acc = v.find("soft")->pooled_accuracy;
            worst_soft = std::min(worst_soft, acc);
            detail += "soft@" + std::to_string(v.n_features) + "=" + fmt("%.4f", acc) + " ";
        }
        detail += "time=" + fmt("%.2f", minutes) + "min on " + std::to_string(thread_count()) + " thread(s)";
        return std::pair{worst_soft >= 0.95 && minutes < 10.0, detail};
    });

    criterion("window-counts", [] {
        const SynthSpec spec;
        const std::size_t expected[] = {28, 29, 27, 7, 6, 16};
        bool ok = true;
        for (int u = 1; u <= spec.n_users; ++u) {
            for (int d = 1; d <= spec.days; ++d) {
                for (Activity a : kAllActivities) ok &= segment(generate_series(spec, u, d, a)).size() == expected[code(a)];
            }
        }
        return std::pair{ok, std::string("normal 28, fast 29, with_bag 27, downstairs 7, upstairs 6 for all 60 users x 2 days")};
    });

    criterion("feature-oracle", [] {
        const auto m = FeatureManifest::default_catalogue();
        std::mt19937_64 rng(42);
        double worst = 0;
        for (int t = 0; t < 60; ++t) {
            Window w;
            w.rate_hz = 25.6;
            for (std::size_t c = 0; c < kChannels; ++c) w.data[c] = test::random_signal(rng, 256, c < 3 ? 2.0 : 0.5);
            const auto fv = extract_window(w, m);
            for (std::size_t i = 0; i < m.size(); ++i) {
                const double want = oracle::feature(m.descriptors()[i], w);
                const double denom = std::max(std::abs(want), std::abs(fv.values[i]));
                if (denom > 0) worst = std::max(worst, std::abs(want - fv.values[i]) / denom);
            }
        }
        double parseval = 0;
        for (int t = 0; t < 100; ++t) {
            const auto x = test::random_signal(rng, t % 2 ? 256 : 100 + t);
            long double a = 0, b = 0;
            for (double v : x) a += static_cast<long double>(v) * v;
            for (const auto& c : dft(x)) b += std::norm(std::complex<long double>(c.real(), c.imag()));
            b /= x.size();
            parseval = std::max(parseval, static_cast<double>(std::fabs(a - b) / a));
        }
        return std::pair{worst < 1e-12 && parseval < 1e-9,
                         "60 windows x " + std::to_string(m.size()) + " features max rel " + fmt("%.2e", worst) +
                             "; parseval max rel " + fmt("%.2e", parseval)};
    });

    criterion("mlp-gradient", [] {
        std::mt19937_64 rng(42);
        std::vector<int> y;
        const Matrix x = test::blobs(rng, 5, 2, 8, 1.0, y);
        MlpNetwork net(8, 12, 2);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        for (double& w : net.parameters()) w = u(rng);
        std::vector<std::size_t> rows(10);
        std::iota(rows.begin(), rows.end(), 0);
        std::vector<double> grad(net.parameters().size()), scratch(grad.size());
        net.loss_and_gradient(x, y, rows, {}, 1.0, grad);
        double worst = 0;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double w = net.parameters()[i];
            net.parameters()[i] = w + 1e-5;
            const double up = net.loss_and_gradient(x, y, rows, {}, 1.0, scratch);
            net.parameters()[i] = w - 1e-5;
            const double down = net.loss_and_gradient(x, y, rows, {}, 1.0, scratch);
            net.parameters()[i] = w;
            const double num = (up - down) / 2e-5;
            const double denom = std::max(std::abs(num), std::abs(grad[i]));
            if (denom > 1e-10) worst = std::max(worst, std::abs(num - grad[i]) / denom);
        }
        return std::pair{worst < 1e-4, "10-sample batch max rel error " + fmt("%.2e", worst)};
    });

    criterion("svm-kkt", [] {
        Matrix xor_x(4, 2);
        const double pts[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
        for (int i = 0; i < 4; ++i) {
            xor_x(i, 0) = pts[i][0];
            xor_x(i, 1) = pts[i][1];
        }
        const std::vector<int> xor_y = {0, 0, 1, 1};
        SvmSpec spec;
        spec.gamma = 1.0;
        const TrainedModel xor_model(train_svm(xor_x, xor_y, spec));
        const bool xor_ok = xor_model.predict(xor_x) == xor_y;

        // Every one-vs-one subproblem on real synthetic features.
        SynthSpec s;
        s.n_users = 3;
        std::vector<Window> windows;
        for (const auto& series : generate_dataset(s)) {
            auto w = segment(series);
            windows.insert(windows.end(), w.begin(), w.end());
        }
        const auto fm = extract_matrix(windows, FeatureManifest::default_catalogue());
        const Matrix x = apply_scaler(fm.values, fit_scaler(fm.values));
        const auto svm = train_svm(x, fm.label_codes(), SvmSpec{});
        bool kkt = true;
        double worst_sum = 0;
        for (const auto& p : svm.pairs) {
            kkt &= p.alpha_min >= 0.0 && p.alpha_max <= svm.c;
            worst_sum = std::max(worst_sum, std::abs(p.alpha_y_sum));
        }
        kkt &= worst_sum <= 1e-6;
        return std::pair{xor_ok && kkt, std::string("xor accuracy ") + (xor_ok ? "1.0" : "<1.0") + "; " +
                                            std::to_string(svm.pairs.size()) + " subproblems, max |sum a*y| " +
                                            fmt("%.2e", worst_sum)};
    });

    criterion("gbt-monotone", [] {
        SynthSpec s;
        s.n_users = 4;
        std::vector<Window> windows;
        for (const auto& series : generate_dataset(s)) {
            auto w = segment(series);
            windows.insert(windows.end(), w.begin(), w.end());
        }
        const auto fm = extract_matrix(windows, FeatureManifest::default_catalogue());
        GbtSpec spec;
        spec.seed = 42;
        const auto m = train_gbt(apply_scaler(fm.values, fit_scaler(fm.values)), fm.label_codes(), spec);
        double worst = -1e300;
        for (std::size_t i = 1; i < m.training_loss.size(); ++i) worst = std::max(worst, m.training_loss[i] - m.training_loss[i - 1]);
        return std::pair{m.training_loss.size() == 501 && worst <= 1e-12,
                         "500 rounds, largest step change " + fmt("%.3e", worst)};
    });

    criterion("ranking-sanity", [] {
        int wins = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> noise(0, 1);
            const std::size_t n = 240, p = 51, signal = seed * 5 % p;
            Matrix x(n, p);
            std::vector<int> y(n);
            std::vector<std::string> ids;
            for (std::size_t j = 0; j < p; ++j) ids.push_back("f" + std::to_string(j));
            for (std::size_t r = 0; r < n; ++r) {
                y[r] = static_cast<int>(r % 6);
                for (std::size_t j = 0; j < p; ++j) x(r, j) = j == signal ? y[r] : noise(rng);
            }
            ForestSpec spec;
            spec.seed = seed;
            wins += rank_features(x, y, ids, spec).order[0] == signal;
        }
        return std::pair{wins == 10, std::to_string(wins) + "/10 seeds rank the injected feature first"};
    });

    criterion("protocol-exactness", [] {
        const auto folds = make_folds(100, 5);
        bool ok = folds.ranges.size() == 5;
        for (std::size_t i = 0; ok && i < 5; ++i) ok &= folds.ranges[i] == std::pair<std::size_t, std::size_t>{20 * i, 20 * i + 20};

        // Leakage: audit every fitting stage of a small real run.
        FeatureMatrix fm;
        std::mt19937_64 rng(1);
        std::normal_distribution<double> noise(0, 1);
        fm.feature_ids = {"a", "b", "c"};
        fm.values = Matrix(60, 3);
        for (std::size_t r = 0; r < 60; ++r) {
            fm.rows.push_back({"u" + std::to_string(10 + r / 12), 1, activity_from_code(static_cast<int>(r % 12 / 2)).value(), r});
            fm.values(r, 0) = static_cast<double>(r % 12 / 2) + 0.1 * noise(rng);
            fm.values(r, 1) = noise(rng);
            fm.values(r, 2) = noise(rng);
        }
        canonicalize(fm);
        FitAudit audit;
        CvOptions opts;
        opts.feature_sizes = {2, 0};
        opts.ranking.n_trees = 10;
        opts.specs.gbt.n_estimators = 5;
        opts.specs.mlp.epochs = 2;
        opts.audit = &audit;
        const auto r = run_cv(fm, *find_scenario("none"), opts);
        bool clean = audit.entries.size() == 5 * (2 + 3 * 2);
        for (const auto& e : audit.entries) {
            const auto [b, end] = r.folds.ranges[e.fold];
            for (std::size_t row : e.rows) clean &= row < b || row >= end;
        }

        Matrix p1(1, 2), p2(1, 2), p3(1, 2);
        p1(0, 0) = 0.6, p1(0, 1) = 0.4;
        p2(0, 0) = 0.2, p2(0, 1) = 0.8;
        p3(0, 0) = 0.55, p3(0, 1) = 0.45;
        const std::vector<Matrix> probs = {p1, p2, p3};
        const std::vector<std::vector<int>> orders(3, {0, 1});
        const bool vote = soft_vote(probs, orders) == std::vector<int>{1};
        return std::pair{ok && clean && vote, std::string("folds ") + (ok ? "ok" : "wrong") + ", leakage audit " +
                                                  (clean ? "clean" : "VIOLATED") + " (" + std::to_string(audit.entries.size()) +
                                                  " fits), soft vote " + (vote ? "class 1" : "wrong")};
    });

    criterion("metric-identities", [] {
        const std::vector<int> y = {0, 1, 2, 2, 3, 1, 0};
        const auto perfect = classification_report(y, y);
        bool ok = true;
        for (const auto& c : perfect.per_class) ok &= c.precision == 1 && c.recall == 1 && c.f1 == 1;
        std::mt19937_64 rng(3);
        std::vector<int> a(1000), b(1000);
        for (int i = 0; i < 1000; ++i) {
            a[i] = static_cast<int>(rng() % 6);
            b[i] = rng() % 2 ? a[i] : static_cast<int>(rng() % 6);
        }
        const auto cm = confusion_matrix(a, b);
        double worst_row = 0;
        for (std::size_t i = 0; i < cm.classes.size(); ++i) {
            double s = 0;
            for (std::size_t j = 0; j < cm.classes.size(); ++j) s += cm.percent(i, j);
            worst_row = std::max(worst_row, std::abs(s - 100));
        }
        const auto pr = classification_report(std::vector<int>{1, 1, 0, 0, 0}, std::vector<int>{1, 0, 1, 0, 0});
        const bool f1 = std::abs(pr.per_class[1].f1 - 0.5) < 1e-15;
        return std::pair{ok && worst_row <= 0.1 && f1,
                         "perfect P=R=F1=1, max row deviation " + fmt("%.1e", worst_row) + ", P=R=p gives F1=p"};
    });

    criterion("determinism", [] {
        const fs::path d = kWork / "det", run = d / "run";
        fs::create_directories(d);
        std::ofstream(d / "cfg.json") << R"({"ranking": {"n_trees": 20}, "gbt": {"n_estimators": 20}, "mlp": {"epochs": 5}})";
        const std::string cfg = " --config " + (d / "cfg.json").string() + " --seed 42";
        const std::string data = (run / "data").string(), feats = (run / "f.csv").string();
        bool ran = true;
        for (int t : {1, 3}) {
            // Identical arguments apart from --threads; each run's outputs are moved aside.
            fs::remove_all(run);
            fs::create_directories(run);
            const std::string common = cfg + " --threads " + std::to_string(t);
            ran &= cli("synth --users 4 --out " + data + common) == 0;
            ran &= cli("extract --data " + data + " --out " + feats + common) == 0;
            ran &= cli("rank --features " + feats + " --out " + (run / "r.csv").string() + common) == 0;
            ran &= cli("pca --features " + feats + " --out " + (run / "p.csv").string() + common) == 0;
            ran &= cli("evaluate --features " + feats + " --out " + (run / "e").string() + common) == 0;
            ran &= cli("report --in " + (run / "e").string() + " --out " + (run / "rep").string()) == 0;
            fs::remove_all(d / ("t" + std::to_string(t)));
            fs::rename(run, d / ("t" + std::to_string(t)));
        }
        std::size_t compared = 0, equal = 0;
        for (const auto& e : fs::recursive_directory_iterator(d / "t1")) {
            if (!e.is_regular_file()) continue;
            const fs::path other = d / "t3" / fs::relative(e.path(), d / "t1");
            ++compared;
            equal += fs::exists(other) && slurp(e.path()) == slurp(other);
        }
        return std::pair{ran && compared == equal && compared > 50,
                         std::to_string(equal) + "/" + std::to_string(compared) + " artifacts identical at --threads 1 vs 3"};
    });

    criterion("normal-withbag-confusion", [] {
        const fs::path bundle = kWork / "identity";
        if (cli("evaluate --seed 42 --scenario none --no-full --features " + (kWork / "features.csv").string() + " --out " +
                bundle.string()) != 0) {
            return std::pair{false, std::string("evaluate failed")};
        }
        const auto results = load_results(bundle);
        const auto& cm = results.at(0).variants.at(0).find("soft")->confusion;
        auto index = [&](Activity a) {
            return static_cast<std::size_t>(std::find(cm.classes.begin(), cm.classes.end(), code(a)) - cm.classes.begin());
        };
        auto worst_off = [&](std::size_t row) {
            std::size_t best = row == 0 ? 1 : 0;
            for (std::size_t j = 0; j < cm.classes.size(); ++j) {
                if (j != row && cm.counts(row, j) > cm.counts(row, best)) best = j;
            }
            return best;
        };
        const std::size_t n = index(Activity::Normal), b = index(Activity::WithBag);
        const bool ok = worst_off(n) == b && worst_off(b) == n && cm.counts(n, b) > 0 && cm.counts(b, n) > 0;
        return std::pair{ok, "normal->with_bag " + fmt("%.2f", cm.percent(n, b)) + "%, with_bag->normal " +
                                 fmt("%.2f", cm.percent(b, n)) + "%"};
    });

    std::printf("%d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
