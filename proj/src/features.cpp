#include "har/features.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>

#include "har/error.hpp"
#include "har/fft.hpp"
#include "har/numfmt.hpp"

namespace har {

namespace {

// Signals and lazily built profiles for one window.
class WindowContext {
public:
    explicit WindowContext(const Window& w) : window_(w) {
        for (std::size_t c = 0; c < kChannels; ++c) spectra_[c] = fft_spectrum(w.data[c]);
    }

    std::span<const double> signal(Sensor s, Domain d, std::size_t axis) {
        const std::size_t sensor = s == Sensor::Acc ? 0 : 1;
        const std::size_t dom = d == Domain::Time ? 0 : 1;
        if (axis == 3) {
            auto& r = resultants_[sensor][dom];
            if (!r) {
                r = resultant(signal(s, d, 0), signal(s, d, 1), signal(s, d, 2));
            }
            return *r;
        }
        const std::size_t ch = sensor * 3 + axis;
        return d == Domain::Time ? std::span<const double>(window_.data[ch]) : std::span<const double>(spectra_[ch]);
    }

    const SignalProfile& profile(Sensor s, Domain d, std::size_t axis) {
        auto& p = profiles_[s == Sensor::Acc ? 0 : 1][d == Domain::Time ? 0 : 1][axis];
        if (!p) p.emplace(signal(s, d, axis), d == Domain::Time ? window_.rate_hz : 0.0);
        return *p;
    }

    const std::vector<double>& bins(Sensor s, std::size_t axis) {
        auto& b = bins_[s == Sensor::Acc ? 0 : 1][axis];
        if (!b) b = binned_distribution(signal(s, Domain::Time, axis));
        return *b;
    }

private:
    const Window& window_;
    std::array<std::vector<double>, kChannels> spectra_;
    std::array<std::array<std::optional<std::vector<double>>, 2>, 2> resultants_;
    std::array<std::array<std::array<std::optional<SignalProfile>, 4>, 2>, 2> profiles_;
    std::array<std::array<std::optional<std::vector<double>>, 3>, 2> bins_;
};

std::pair<std::size_t, std::size_t> pair_axes(Axis a) {
    switch (a) {
        case Axis::XY: return {0, 1};
        case Axis::YZ: return {1, 2};
        default: return {0, 2};
    }
}

void fill_row(const Window& window, const FeatureManifest& manifest, std::span<double> out) {
    for (const auto& ch : window.data) {
        if (ch.size() != window.length()) throw DataError("window channels differ in length");
    }
    WindowContext ctx(window);
    const auto& desc = manifest.descriptors();
    for (std::size_t i = 0; i < desc.size(); ++i) {
        const FeatureDescriptor& d = desc[i];
        if (!is_legal(d)) throw UsageError("illegal feature descriptor: " + d.id());
        switch (d.statistic) {
            case Statistic::Covariance:
            case Statistic::Correlation: {
                auto [a, b] = pair_axes(d.axis);
                out[i] = compute_pair_statistic(d.statistic, ctx.signal(d.sensor, d.domain, a),
                                                ctx.signal(d.sensor, d.domain, b));
                break;
            }
            case Statistic::AvgResultant: out[i] = ctx.profile(d.sensor, d.domain, 3).mean(); break;
            case Statistic::Binned:
                out[i] = ctx.bins(d.sensor, static_cast<std::size_t>(d.axis))[static_cast<std::size_t>(d.bin)];
                break;
            default: {
                const std::size_t axis = d.axis == Axis::Resultant ? 3 : static_cast<std::size_t>(d.axis);
                out[i] = ctx.profile(d.sensor, d.domain, axis).scalar(d.statistic);
            }
        }
    }
}

RowMeta meta_of(const Window& w) { return {w.user_id, w.day, w.label, w.start_index}; }

FeatureMatrix empty_matrix(std::span<const Window> windows, const FeatureManifest& manifest) {
    FeatureMatrix fm;
    fm.feature_ids = manifest.ids();
    fm.rows.reserve(windows.size());
    for (const auto& w : windows) fm.rows.push_back(meta_of(w));
    fm.values = Matrix(windows.size(), manifest.size());
    return fm;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::vector<int> FeatureMatrix::label_codes() const {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(code(r.label));
    return out;
}

FeatureVector extract_window(const Window& window, const FeatureManifest& manifest) {
    FeatureVector fv;
    fv.meta = meta_of(window);
    fv.values.resize(manifest.size());
    fill_row(window, manifest, fv.values);
    return fv;
}

FeatureMatrix extract_matrix(std::span<const Window> windows, const FeatureManifest& manifest) {
    FeatureMatrix fm = empty_matrix(windows, manifest);
    const auto n = static_cast<std::ptrdiff_t>(windows.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            fill_row(windows[static_cast<std::size_t>(i)], manifest, fm.values.row(static_cast<std::size_t>(i)));
        } catch (...) {
#pragma omp critical(har_extract_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return fm;
}

FeatureMatrix extract_matrix_serial(std::span<const Window> windows, const FeatureManifest& manifest) {
    FeatureMatrix fm = empty_matrix(windows, manifest);
    for (std::size_t i = 0; i < windows.size(); ++i) fill_row(windows[i], manifest, fm.values.row(i));
    return fm;
}

void write_feature_csv(const FeatureMatrix& fm, std::ostream& out) {
    std::string buf = "user,day,activity,start_index";
    for (const auto& id : fm.feature_ids) {
        buf += ',';
        buf += id;
    }
    buf += '\n';
    for (std::size_t r = 0; r < fm.rows.size(); ++r) {
        const RowMeta& m = fm.rows[r];
        buf += m.user_id;
        buf += ',';
        buf += std::to_string(m.day);
        buf += ',';
        buf += activity_name(m.label);
        buf += ',';
        buf += std::to_string(m.start_index);
        for (double v : fm.values.row(r)) {
            buf += ',';
            append_double(buf, v);
        }
        buf += '\n';
    }
    out << buf;
}

void write_feature_csv(const FeatureMatrix& fm, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_feature_csv(fm, out);
}

FeatureMatrix read_feature_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("feature matrix: missing header");
    auto header = split_csv(trim(line));
    if (header.size() < 5 || header[0] != "user" || header[1] != "day" || header[2] != "activity" ||
        header[3] != "start_index") {
        throw DataError("feature matrix: malformed header");
    }
    FeatureMatrix fm;
    for (std::size_t i = 4; i < header.size(); ++i) fm.feature_ids.emplace_back(header[i]);
    const std::size_t p = fm.feature_ids.size();
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = trim(line);
        if (row.empty()) continue;
        auto f = split_csv(row);
        if (f.size() != p + 4) throw DataError("feature matrix: wrong field count on line " + std::to_string(line_no));
        RowMeta m;
        m.user_id = std::string(f[0]);
        auto day = parse_int<int>(f[1]);
        auto label = parse_activity(f[2]);
        auto start = parse_int<std::size_t>(f[3]);
        if (!day || !label || !start) throw DataError("feature matrix: bad metadata on line " + std::to_string(line_no));
        m.day = *day;
        m.label = *label;
        m.start_index = *start;
        fm.rows.push_back(std::move(m));
        for (std::size_t j = 0; j < p; ++j) {
            auto v = parse_double(f[j + 4]);
            if (!v) throw DataError("feature matrix: bad value on line " + std::to_string(line_no));
            values.push_back(*v);
        }
    }
    fm.values = Matrix(fm.rows.size(), p);
    std::copy(values.begin(), values.end(), fm.values.data().begin());
    return fm;
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open feature matrix: " + path.string());
    return read_feature_csv(in);
}

}  // namespace har
