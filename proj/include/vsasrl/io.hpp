// Copyright 2026 The vsasrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File output of the batch commands: CSV tables written with shortest
// round-trip number formatting, so reading a file back gives bitwise the
// values that were written, and JSON summaries.

#ifndef VSASRL_IO_HPP
#define VSASRL_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsasrl/motion.hpp"
#include "vsasrl/stab.hpp"
#include "vsasrl/workspace.hpp"

namespace vsasrl {

/// Environment variable naming the output directory of the CLI.
inline constexpr const char* kLogDirEnv = "VSASRL_LOG_DIR";

/// $VSASRL_LOG_DIR when set and non-empty, otherwise `fallback`.
std::filesystem::path log_directory(const std::filesystem::path& fallback = "vsasrl_logs");

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

/// A header plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& out, const CsvTable& table);
/// Throws InvalidArgument on ragged rows or non-numeric cells.
CsvTable read_csv(std::istream& in);

/// Track log columns; angles in radians, torques in N m, positions in mm.
extern const std::vector<std::string> kTrackColumns;
CsvTable track_table(const TrajectoryLog& log);
nlohmann::json track_summary(const TrajectoryLog& log);

extern const std::vector<std::string> kStabColumns;
CsvTable stab_table(const std::vector<StabResult>& results);

void write_occupancy_csv(std::ostream& out, const std::vector<OccupancyRow>& rows);

nlohmann::json workspace_summary(const WorkspaceResult& r);

/// Writes `text` to `path` (creating parent directories); throws Error on
/// I/O failure.
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace vsasrl

#endif  // VSASRL_IO_HPP
