#include "epr/coincidence.hpp"

#include "epr/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace epr {

namespace {

void check_sorted(const TagStream& s, const char* which) {
    for (std::size_t i = 1; i < s.tags_ps.size(); ++i) {
        if (s.tags_ps[i] < s.tags_ps[i - 1]) {
            throw ordering_error(
                std::string("unsorted tag stream ") + which + " at index " +
                    std::to_string(i),
                i);
        }
    }
}

} // namespace

std::int64_t count_coincidences(const TagStream& a, const TagStream& b,
                                std::int64_t window_ps) {
    if (window_ps < 0) throw parameter_error("coincidence window must be >= 0");
    check_sorted(a, "a");
    check_sorted(b, "b");
    std::size_t i = 0, j = 0;
    std::int64_t count = 0;
    while (i < a.tags_ps.size() && j < b.tags_ps.size()) {
        const std::int64_t ta = a.tags_ps[i];
        const std::int64_t tb = b.tags_ps[j];
        if (ta < tb - window_ps) {
            ++i;
        } else if (tb < ta - window_ps) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

std::int64_t DelayHistogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

DelayHistogram coincidence_histogram(const TagStream& a, const TagStream& b,
                                     std::int64_t bin_ps, std::int64_t span_ps) {
    if (bin_ps <= 0) throw parameter_error("histogram bin must be > 0");
    if (span_ps < bin_ps) throw parameter_error("histogram span must be >= bin");
    check_sorted(a, "a");
    check_sorted(b, "b");

    DelayHistogram h;
    h.bin_ps = bin_ps;
    h.span_ps = span_ps;
    const std::size_t nbins =
        static_cast<std::size_t>((2 * span_ps + bin_ps - 1) / bin_ps);
    h.counts.assign(nbins, 0);

    std::size_t lo = 0;
    for (const std::int64_t ta : a.tags_ps) {
        while (lo < b.tags_ps.size() && b.tags_ps[lo] < ta - span_ps) ++lo;
        for (std::size_t j = lo; j < b.tags_ps.size(); ++j) {
            const std::int64_t dt = b.tags_ps[j] - ta;
            if (dt > span_ps) break;
            std::size_t k = static_cast<std::size_t>((dt + span_ps) / bin_ps);
            if (k >= nbins) k = nbins - 1; // dt == +span
            ++h.counts[k];
        }
    }
    return h;
}

double accidental_rate_hz(double rate1_hz, double rate2_hz, double window_ps) {
    return rate1_hz * rate2_hz * 2.0 * window_ps * 1e-12;
}

namespace {
constexpr char kMagic[4] = {'T', 'T', 'G', '1'};
}

void write_tag_file(const std::string& path, const TagStream& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot open " + path + " for writing");
    f.write(kMagic, 4);
    const std::uint32_t ch = s.channel;
    const std::uint64_t count = s.tags_ps.size();
    f.write(reinterpret_cast<const char*>(&ch), 4);
    f.write(reinterpret_cast<const char*>(&count), 8);
    for (const std::int64_t t : s.tags_ps) {
        const std::uint64_t u = static_cast<std::uint64_t>(t);
        f.write(reinterpret_cast<const char*>(&u), 8);
    }
    if (!f) throw input_error("short write to " + path);
}

void write_tag_file_csv(const std::string& path, const TagStream& s) {
    std::ofstream f(path);
    if (!f) throw input_error("cannot open " + path + " for writing");
    for (const std::int64_t t : s.tags_ps) f << t << '\n';
    if (!f) throw input_error("short write to " + path);
}

TagStream read_tag_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot open " + path);
    char magic[4] = {};
    f.read(magic, 4);
    TagStream s;
    if (f.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) {
        std::uint32_t ch = 0;
        std::uint64_t count = 0;
        f.read(reinterpret_cast<char*>(&ch), 4);
        f.read(reinterpret_cast<char*>(&count), 8);
        if (!f) throw input_error("truncated tag file header: " + path);
        s.channel = ch;
        s.tags_ps.resize(count);
        f.read(reinterpret_cast<char*>(s.tags_ps.data()),
               static_cast<std::streamsize>(count * 8));
        if (static_cast<std::uint64_t>(f.gcount()) != count * 8)
            throw input_error("truncated tag file payload: " + path);
        return s;
    }
    // CSV fallback: one integer per line.
    f.clear();
    f.seekg(0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::int64_t v = 0;
        const char* begin = line.data();
        const char* end = begin + line.size();
        while (end > begin && (end[-1] == '\r' || end[-1] == ' ')) --end;
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || ptr != end)
            throw input_error("bad tag at " + path + ":" +
                              std::to_string(lineno));
        s.tags_ps.push_back(v);
    }
    return s;
}

} // namespace epr
