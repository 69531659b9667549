#pragma once

#include "epr/scansim.hpp"

#include <string>

namespace epr {

// CSV columns: i1,j1,i2,j2,x1_um,y1_um,x2_um,y2_um,s1,s2,cc,dwell_s with one
// header row; full configuration travels in a JSON sidecar at <path>.json.
// Writes are deterministic: a fixed seed reproduces byte-identical files.
void write_dataset(const ScanDataset& ds, const std::string& csv_path);
ScanDataset read_dataset(const std::string& csv_path);

std::string sidecar_path(const std::string& csv_path);

} // namespace epr
