#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scenfuzz/dedup.hpp"
#include "scenfuzz/evolve.hpp"

namespace scenfuzz {

/// Append-only evaluation log, one JSON object per line. Writing is done in
/// one pass at the end of a run so identical runs produce identical bytes.
void write_runlog(const std::string& path, const std::vector<RunLogRecord>& records);

/// Parses a JSONL log; a malformed record raises IoError naming the line.
std::vector<RunLogRecord> read_runlog(const std::string& path);

void write_archive(const std::string& path, const ViolationArchive& archive);

/// Archive entries as stored on disk (vector, kind, generation, objectives).
std::vector<ArchiveEntry> read_archive_entries(const std::string& path);

/// Cumulative unique-violation count after each simulation, in log order.
/// Monotone non-decreasing by construction.
std::vector<int> curve_from_log(const std::vector<RunLogRecord>& records);

/// CSV with one `simulation` column and one column per labeled series.
/// Shorter series hold their last value so every row is full.
void write_curves_csv(const std::string& path,
                      const std::vector<std::pair<std::string, std::vector<int>>>& series);

}  // namespace scenfuzz
