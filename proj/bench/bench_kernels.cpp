// Serial reference vs OpenMP timing for the parallel kernels, on synthetic data.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "har/features.hpp"
#include "har/forest.hpp"
#include "har/gbt.hpp"
#include "har/manifest.hpp"
#include "har/parallel.hpp"
#include "har/preprocess.hpp"
#include "har/segment.hpp"
#include "har/svm.hpp"
#include "har/synth.hpp"

using namespace har;

namespace {

double seconds(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void compare(const char* name, const std::function<void(Execution)>& kernel, int reps) {
    double serial = 0, parallel = 0;
    for (int r = 0; r < reps; ++r) {
        serial += seconds([&] { kernel(Execution::Serial); });
        parallel += seconds([&] { kernel(Execution::Parallel); });
    }
    serial /= reps;
    parallel /= reps;
    std::printf("%-16s serial %8.3f s  parallel %8.3f s  speedup %5.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel benchmark: serial reference vs OpenMP"};
    int users = 6, reps = 1, threads = 0;
    app.add_option("--users", users, "Synthetic users");
    app.add_option("--reps", reps, "Repetitions per kernel");
    app.add_option("--threads", threads, "OpenMP worker cap");
    CLI11_PARSE(app, argc, argv);
    set_thread_count(threads);
    std::printf("threads %d\n", thread_count());

    SynthSpec spec;
    spec.n_users = users;
    std::vector<Window> windows;
    for (const auto& s : generate_dataset(spec)) {
        auto w = segment(s);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    const auto manifest = FeatureManifest::default_catalogue();
    std::printf("windows %zu, features %zu\n", windows.size(), manifest.size());

    FeatureMatrix fm;
    compare("extract", [&](Execution e) {
        fm = e == Execution::Serial ? extract_matrix_serial(windows, manifest) : extract_matrix(windows, manifest);
    }, reps);

    const Matrix x = apply_scaler(fm.values, fit_scaler(fm.values));
    const auto codes = fm.label_codes();
    const auto enc = LabelEncoding::fit(codes);

    ForestSpec forest;
    forest.n_trees = 50;
    compare("forest(50)", [&](Execution e) {
        RandomForest::fit(x, enc.encoded, static_cast<int>(enc.classes.size()), forest, e);
    }, reps);

    GbtSpec gbt;
    gbt.n_estimators = 50;
    compare("gbt(50)", [&](Execution e) { train_gbt(x, codes, gbt, e); }, reps);

    compare("svm", [&](Execution e) { train_svm(x, codes, SvmSpec{}, e); }, reps);
    return 0;
}
