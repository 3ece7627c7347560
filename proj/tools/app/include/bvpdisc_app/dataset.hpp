#pragma once

#include <cstdint>
#include <filesystem>

#include "bvpdisc/bvpdisc.hpp"

namespace bvpdisc::app {

// Columnar text: header "x,f_1..f_m,u_1..u_m", one row per grid point, every
// value printed with 17 significant digits.  The JSON sidecar sits next to it
// with the extension replaced by ".json".
void write_dataset(const TrialSet& trials, const std::filesystem::path& csv_path,
                   std::uint64_t seed);

// Reads a dataset written by write_dataset.  The grid is rebuilt from the
// sidecar's (a, b, n) and checked against the x column.
TrialSet read_dataset(const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace bvpdisc::app
