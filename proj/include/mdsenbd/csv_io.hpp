#pragma once

#include "mdsenbd/model.hpp"
#include "mdsenbd/process.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace mdsenbd {

/// Event-count CSV: a header row `period,<name1>,...,<nameD>` or
/// `<name1>,...,<nameD>`, then one row per period with integer counts.
/// A leading UTF-8 BOM and CRLF line endings are accepted; blank lines are skipped.
/// Negative, non-integer, missing or ragged cells raise SchemaError with 1-based
/// file row and column.
[[nodiscard]] EventSeries read_csv(std::istream& in);
[[nodiscard]] EventSeries ingest_csv(const std::filesystem::path& path);

/// Writes the format read_csv accepts; the period column is present iff the
/// series has labels.
void write_csv(std::ostream& out, const EventSeries& series);
void write_csv(const std::filesystem::path& path, const EventSeries& series);

/// Simulates `horizon` periods (labels 1..horizon) and writes them to `path`
/// with a period column, even when `horizon` is 0.
EventSeries generate_synthetic(const ModelSpec& spec,
                               std::size_t horizon,
                               std::uint64_t seed,
                               const std::filesystem::path& path,
                               const SimulationOptions& options = {});

}  // namespace mdsenbd
