#pragma once

#include <filesystem>
#include <string>

#include "emcopp/archive.hpp"

namespace emcopp {

enum class ArchiveFormat { Csv };

// CSV schemas (ISO-8601 dates, UTF-8, '.' decimal point):
//   forecasts:    date,init_date,variable,station,lead_hours,member,value
//   observations: date,variable,station,value
// Rows are ordered by (date, margin id, member); values are written with
// full round-trip precision so write -> load is lossless.

Archive load_archive(const std::filesystem::path& forecasts_path,
                     const std::filesystem::path& observations_path,
                     ArchiveFormat format = ArchiveFormat::Csv);

void write_archive(const Archive& archive,
                   const std::filesystem::path& forecasts_path,
                   const std::filesystem::path& observations_path,
                   ArchiveFormat format = ArchiveFormat::Csv);

}  // namespace emcopp
