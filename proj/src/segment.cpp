#include "har/segment.hpp"

#include "har/error.hpp"

namespace har {

std::vector<Window> segment(const SensorSeries& series, std::size_t window_len) {
    if (window_len < 2) throw UsageError("window length must be at least 2 samples");
    const std::size_t count = series.samples.size() / window_len;
    std::vector<Window> windows(count);
    for (std::size_t w = 0; w < count; ++w) {
        Window& win = windows[w];
        win.user_id = series.user_id;
        win.day = series.day;
        win.label = series.label;
        win.start_index = w * window_len;
        win.rate_hz = series.nominal_rate_hz;
        for (auto& ch : win.data) ch.resize(window_len);
        for (std::size_t i = 0; i < window_len; ++i) {
            const RawRecord& r = series.samples[win.start_index + i];
            for (std::size_t c = 0; c < 3; ++c) {
                win.data[c][i] = r.acc[c];
                win.data[c + 3][i] = r.gyro[c];
            }
        }
    }
    return windows;
}

}  // namespace har
