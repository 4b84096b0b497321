#include "har/manifest.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "har/error.hpp"
#include "har/numfmt.hpp"

namespace har {

namespace {

constexpr std::array<std::string_view, 7> kAxisNames = {"x", "y", "z", "xy", "yz", "xz", "resultant"};

bool single_axis(Axis a) { return a == Axis::X || a == Axis::Y || a == Axis::Z; }
bool pair_axis(Axis a) { return a == Axis::XY || a == Axis::YZ || a == Axis::XZ; }

// Statistics computed per axis in both domains.
constexpr std::array<Statistic, 15> kSharedPerAxis = {
    Statistic::Mean,     Statistic::Std,      Statistic::Median,    Statistic::Variance,
    Statistic::ZeroCrossingRate, Statistic::Iqr, Statistic::AvgAbsDiff, Statistic::Rms,
    Statistic::Skewness, Statistic::Kurtosis, Statistic::P25,       Statistic::P50,
    Statistic::P75,      Statistic::Max,      Statistic::Min,
};

constexpr std::array<Statistic, 4> kTimePeaks = {
    Statistic::MaxPeak, Statistic::MinPeak, Statistic::PeakCount, Statistic::TimeBetweenPeaks};

bool in(Statistic s, std::span<const Statistic> set) {
    for (Statistic t : set) {
        if (t == s) return true;
    }
    return false;
}

}  // namespace

std::string FeatureDescriptor::id() const {
    std::string s = sensor == Sensor::Acc ? "acc." : "gyro.";
    s += domain == Domain::Time ? "time." : "freq.";
    s += statistic_name(statistic);
    s += '.';
    s += kAxisNames[static_cast<std::size_t>(axis)];
    if (statistic == Statistic::Binned) s += "_bin" + std::to_string(bin);
    return s;
}

FeatureDescriptor FeatureDescriptor::parse(std::string_view id) {
    std::array<std::string_view, 4> parts;
    std::size_t start = 0;
    for (std::size_t p = 0; p < 4; ++p) {
        std::size_t dot = id.find('.', start);
        if ((p < 3) == (dot == std::string_view::npos)) throw UsageError("malformed feature id: " + std::string(id));
        parts[p] = id.substr(start, p < 3 ? dot - start : std::string_view::npos);
        start = dot + 1;
    }
    FeatureDescriptor d;
    if (parts[0] == "acc") d.sensor = Sensor::Acc;
    else if (parts[0] == "gyro") d.sensor = Sensor::Gyro;
    else throw UsageError("unknown sensor in feature id: " + std::string(id));
    if (parts[1] == "time") d.domain = Domain::Time;
    else if (parts[1] == "freq") d.domain = Domain::Freq;
    else throw UsageError("unknown domain in feature id: " + std::string(id));
    auto stat = parse_statistic(parts[2]);
    if (!stat) throw UsageError("unknown statistic in feature id: " + std::string(id));
    d.statistic = *stat;

    std::string_view axis = parts[3];
    if (d.statistic == Statistic::Binned) {
        auto pos = axis.find("_bin");
        if (pos == std::string_view::npos) throw UsageError("binned feature id needs _binK: " + std::string(id));
        auto bin = parse_int<int>(axis.substr(pos + 4));
        if (!bin) throw UsageError("bad bin index in feature id: " + std::string(id));
        d.bin = *bin;
        axis = axis.substr(0, pos);
    }
    bool found = false;
    for (std::size_t i = 0; i < kAxisNames.size(); ++i) {
        if (kAxisNames[i] == axis) {
            d.axis = static_cast<Axis>(i);
            found = true;
        }
    }
    if (!found) throw UsageError("unknown axis in feature id: " + std::string(id));
    return d;
}

bool is_legal(const FeatureDescriptor& d) {
    const bool time = d.domain == Domain::Time;
    if (d.statistic != Statistic::Binned && d.bin != -1) return false;
    switch (d.statistic) {
        case Statistic::Covariance:
        case Statistic::Correlation: return pair_axis(d.axis);
        case Statistic::AvgResultant: return d.axis == Axis::Resultant;
        case Statistic::Max:
        case Statistic::Min: return single_axis(d.axis) || (time && d.axis == Axis::Resultant);
        case Statistic::Difference: return time && single_axis(d.axis);
        case Statistic::Binned:
            return time && single_axis(d.axis) && d.bin >= 0 && d.bin < static_cast<int>(kBinCount);
        case Statistic::MaxPeak:
        case Statistic::MinPeak:
        case Statistic::PeakCount:
        case Statistic::TimeBetweenPeaks: return time && single_axis(d.axis);
        case Statistic::Entropy:
        case Statistic::Energy: return !time && single_axis(d.axis);
        default: return in(d.statistic, kSharedPerAxis) && single_axis(d.axis);
    }
}

FeatureManifest::FeatureManifest(std::vector<FeatureDescriptor> descriptors)
    : descriptors_(std::move(descriptors)) {
    std::unordered_set<std::string> seen;
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t i = 0; i < descriptors_.size(); ++i) {
        const auto& d = descriptors_[i];
        std::string id = d.id();
        if (!is_legal(d)) throw UsageError("illegal feature descriptor: " + id);
        if (!seen.insert(id).second) throw UsageError("duplicate feature id: " + id);
        if (i > 0) {
            h ^= static_cast<unsigned char>('\n');
            h *= 1099511628211ULL;
        }
        for (char c : id) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        ids_.push_back(std::move(id));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    hash_ = buf;
}

FeatureManifest FeatureManifest::default_catalogue() {
    std::vector<FeatureDescriptor> out;
    constexpr std::array<Axis, 3> xyz = {Axis::X, Axis::Y, Axis::Z};
    constexpr std::array<Axis, 3> pairs = {Axis::XY, Axis::YZ, Axis::XZ};
    for (Sensor sensor : {Sensor::Acc, Sensor::Gyro}) {
        for (Domain domain : {Domain::Time, Domain::Freq}) {
            auto add = [&](Statistic s, Axis a, int bin = -1) { out.push_back({sensor, domain, s, a, bin}); };
            for (Statistic s : kSharedPerAxis) {
                for (Axis a : xyz) add(s, a);
            }
            for (Axis a : pairs) add(Statistic::Covariance, a);
            for (Axis a : pairs) add(Statistic::Correlation, a);
            add(Statistic::AvgResultant, Axis::Resultant);
            if (domain == Domain::Time) {
                // x/y/z maxima and minima already appear in the shared block.
                add(Statistic::Max, Axis::Resultant);
                add(Statistic::Min, Axis::Resultant);
                for (Axis a : xyz) add(Statistic::Difference, a);
                for (Axis a : xyz) {
                    for (int b = 0; b < static_cast<int>(kBinCount); ++b) add(Statistic::Binned, a, b);
                }
                for (Statistic s : kTimePeaks) {
                    for (Axis a : xyz) add(s, a);
                }
            } else {
                for (Axis a : xyz) add(Statistic::Entropy, a);
                for (Axis a : xyz) add(Statistic::Energy, a);
            }
        }
    }
    return FeatureManifest(std::move(out));
}

FeatureManifest FeatureManifest::parse(std::istream& in) {
    std::vector<FeatureDescriptor> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view s = line;
        if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        out.push_back(FeatureDescriptor::parse(s));
    }
    if (out.empty()) throw UsageError("feature manifest is empty");
    return FeatureManifest(std::move(out));
}

FeatureManifest FeatureManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open manifest: " + path.string());
    return parse(in);
}

void FeatureManifest::write(std::ostream& out) const {
    out << "# feature manifest: " << ids_.size() << " features, hash " << hash_ << '\n';
    for (const auto& id : ids_) out << id << '\n';
}

std::optional<std::size_t> FeatureManifest::index_of(std::string_view id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (ids_[i] == id) return i;
    }
    return std::nullopt;
}

}  // namespace har
