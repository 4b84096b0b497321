#include "har/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "har/error.hpp"
#include "har/numfmt.hpp"

namespace har {

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string rate_band_message(double rate, const IngestOptions& opts) {
    std::ostringstream os;
    os << "sampling rate " << rate << " Hz outside validity band [" << opts.min_rate_hz << ", "
       << opts.max_rate_hz << "]";
    return os.str();
}

}  // namespace

ColumnMap ColumnMap::from_names(std::span<const std::string> header,
                                std::span<const std::string, 7> names) {
    std::array<std::size_t, 7> idx{};
    for (std::size_t c = 0; c < 7; ++c) {
        auto it = std::find_if(header.begin(), header.end(),
                               [&](const std::string& h) { return trim(h) == trim(names[c]); });
        if (it == header.end()) throw DataError("malformed header: no column named '" + names[c] + "'");
        idx[c] = static_cast<std::size_t>(it - header.begin());
    }
    ColumnMap m{idx[0], idx[1], idx[2], idx[3], idx[4], idx[5], idx[6]};
    m.validate(header.size());
    return m;
}

void ColumnMap::validate(std::size_t width) const {
    auto idx = indices();
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= width) throw DataError("column map index out of range for header width");
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            if (idx[i] == idx[j]) throw DataError("column map indices are not distinct");
        }
    }
}

ParseResult parse_sensor_stream(std::istream& in, const ColumnMap& map, const SessionMeta& meta,
                                const IngestOptions& opts) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("malformed header: empty recording");
    auto header = split(trim(line), opts.delimiter);
    if (header.size() < 7 || std::any_of(header.begin(), header.end(), [](auto h) {
            return trim(h).empty() || parse_double(h).has_value();
        })) {
        throw DataError("malformed header");
    }
    map.validate(header.size());
    const auto idx = map.indices();

    ParseResult result;
    SensorSeries& series = result.series;
    series.user_id = meta.user_id;
    series.day = meta.day;
    series.label = meta.label;

    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::string_view row = trim(line);
        if (row.empty()) continue;
        ++rows;
        auto fields = split(row, opts.delimiter);
        if (fields.size() < header.size()) {
            ++result.dropped;
            continue;
        }
        auto t = parse_int<std::int64_t>(fields[idx[0]]);
        if (!t || *t < 0 || (!series.samples.empty() && *t <= series.samples.back().t_ms)) {
            ++result.dropped;
            continue;
        }
        RawRecord rec;
        rec.t_ms = *t;
        bool ok = true;
        for (std::size_t c = 0; c < 6 && ok; ++c) {
            auto v = parse_double(fields[idx[c + 1]]);
            if (!v || !std::isfinite(*v)) {
                ok = false;
                break;
            }
            (c < 3 ? rec.acc[c] : rec.gyro[c - 3]) = *v;
        }
        if (!ok) {
            ++result.dropped;
            continue;
        }
        series.samples.push_back(rec);
    }

    if (series.samples.size() < 2 ||
        static_cast<double>(result.dropped) > opts.max_drop_fraction * static_cast<double>(rows)) {
        std::ostringstream os;
        os << "corrupt recording: " << series.samples.size() << " samples kept, " << result.dropped
           << " of " << rows << " rows dropped";
        throw DataError(os.str());
    }
    double rate = estimate_rate(series);
    if (rate < opts.min_rate_hz || rate > opts.max_rate_hz) throw DataError(rate_band_message(rate, opts));
    return result;
}

ParseResult parse_sensor_csv(const std::filesystem::path& path, const ColumnMap& map,
                             const SessionMeta& meta, const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open recording: " + path.string());
    try {
        return parse_sensor_stream(in, map, meta, opts);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

double estimate_rate(SensorSeries& series) {
    if (series.samples.size() < 2) throw DataError("estimate_rate needs at least two samples");
    const double span_s =
        static_cast<double>(series.samples.back().t_ms - series.samples.front().t_ms) / 1000.0;
    if (!(span_s > 0.0)) throw DataError("estimate_rate: zero time span");
    series.nominal_rate_hz = static_cast<double>(series.samples.size() - 1) / span_s;
    return series.nominal_rate_hz;
}

Track acc_track(const SensorSeries& series) {
    Track t;
    for (const auto& r : series.samples) {
        t.t_ms.push_back(r.t_ms);
        t.values.push_back(r.acc);
    }
    return t;
}

Track gyro_track(const SensorSeries& series) {
    Track t;
    for (const auto& r : series.samples) {
        t.t_ms.push_back(r.t_ms);
        t.values.push_back(r.gyro);
    }
    return t;
}

SensorSeries align_tracks(const Track& acc, const Track& gyro, const SessionMeta& meta) {
    if (acc.t_ms.empty() || gyro.t_ms.empty() || acc.t_ms.size() != acc.values.size() ||
        gyro.t_ms.size() != gyro.values.size()) {
        throw DataError("align_tracks: empty or inconsistent track");
    }
    const std::int64_t lo = std::max(acc.t_ms.front(), gyro.t_ms.front());
    const std::int64_t hi = std::min(acc.t_ms.back(), gyro.t_ms.back());
    if (lo > hi) throw DataError("align_tracks: no overlap between accelerometer and gyroscope");

    SensorSeries out;
    out.user_id = meta.user_id;
    out.day = meta.day;
    out.label = meta.label;

    std::size_t g = 0;
    for (std::size_t i = 0; i < acc.t_ms.size(); ++i) {
        const std::int64_t t = acc.t_ms[i];
        if (t < lo || t > hi) continue;
        while (g + 1 < gyro.t_ms.size() && gyro.t_ms[g + 1] <= t) ++g;
        RawRecord rec;
        rec.t_ms = t;
        rec.acc = acc.values[i];
        if (gyro.t_ms[g] == t || g + 1 == gyro.t_ms.size()) {
            rec.gyro = gyro.values[g];
        } else {
            const double w = static_cast<double>(t - gyro.t_ms[g]) /
                             static_cast<double>(gyro.t_ms[g + 1] - gyro.t_ms[g]);
            for (std::size_t c = 0; c < 3; ++c) {
                rec.gyro[c] = gyro.values[g][c] + w * (gyro.values[g + 1][c] - gyro.values[g][c]);
            }
        }
        out.samples.push_back(rec);
    }
    if (out.samples.size() >= 2) estimate_rate(out);
    return out;
}

void write_canonical_csv(const SensorSeries& series, std::ostream& out) {
    std::string buf;
    buf.append(kCanonicalHeader);
    buf.push_back('\n');
    for (const auto& r : series.samples) {
        buf.append(std::to_string(r.t_ms));
        for (double v : r.acc) {
            buf.push_back(',');
            append_double(buf, v);
        }
        for (double v : r.gyro) {
            buf.push_back(',');
            append_double(buf, v);
        }
        buf.push_back('\n');
    }
    out << buf;
}

void write_canonical_csv(const SensorSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_canonical_csv(series, out);
}

}  // namespace har
