#pragma once

#include "epr/model.hpp"
#include "epr/optics.hpp"
#include "epr/scansim.hpp"

#include <cstdint>
#include <string>

namespace epr {

// Run configuration: JSON document with sections source/lens/grid/noise plus
// seed and optional output path. Every section and key is optional (defaults
// apply) but unknown keys are rejected, and module invariants are
// re-validated after loading.
struct RunConfig {
    SourceParams source;
    LensConfig lens; // mode assigned per command
    ScanGrid grid;
    NoiseModel noise;
    std::uint64_t seed = 1;
    std::string out_path;

    static RunConfig defaults();
    static RunConfig load(const std::string& path);
    static RunConfig parse(const std::string& text); // throws input_error
    void validate() const;
};

} // namespace epr
