#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace epr {

struct TagStream {
    std::vector<std::int64_t> tags_ps; // non-decreasing
    std::uint32_t channel = 0;
};

// Greedy earliest-first pairing: each tag participates in at most one
// coincidence, |ta - tb| <= window counts (closed interval).
std::int64_t count_coincidences(const TagStream& a, const TagStream& b,
                                std::int64_t window_ps);

// All-pairs delay histogram of tb - ta over [-span, span]. Bin k covers
// [-span + k*bin, -span + (k+1)*bin), with the last bin closed at +span.
struct DelayHistogram {
    std::int64_t bin_ps = 0;
    std::int64_t span_ps = 0;
    std::vector<std::int64_t> counts;
    std::int64_t total() const;
    double bin_center_ps(std::size_t k) const {
        return -static_cast<double>(span_ps) + (k + 0.5) * bin_ps;
    }
};

DelayHistogram coincidence_histogram(const TagStream& a, const TagStream& b,
                                     std::int64_t bin_ps, std::int64_t span_ps);

// Expected accidental rate of the greedy counter for uncorrelated streams:
// the closed +-window acceptance is 2*window wide.
double accidental_rate_hz(double rate1_hz, double rate2_hz, double window_ps);

// Tag file I/O. Binary format: 16-byte header {magic "TTG1", u32 channel,
// u64 count}, then count little-endian u64 picosecond stamps. Files without
// the magic are parsed as CSV, one integer per line.
void write_tag_file(const std::string& path, const TagStream& s);
void write_tag_file_csv(const std::string& path, const TagStream& s);
TagStream read_tag_file(const std::string& path);

} // namespace epr
