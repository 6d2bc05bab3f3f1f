#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dirhdr/geometry.hpp"

namespace dirhdr {

//! On-disk point formats: one angle column (radians or degrees) for circle
//! data, lon/lat degree pairs or raw coordinates for sphere data. "xyz"
//! accepts 2 columns (circle) or 3 (sphere), decided by the first valid row.
enum class DataFormat { angles_rad, angles_deg, lonlat_deg, xyz };

DataFormat parse_data_format(const std::string& name);
std::string data_format_name(DataFormat format);

//! A parsed point file plus its ingestion log.
struct Dataset {
    int q = 1;
    std::vector<UnitVector> points;
    std::string path;
    DataFormat format = DataFormat::angles_rad;
    std::size_t rows_total = 0;    //!< data rows attempted (header/blank/comment excluded)
    std::size_t rows_skipped = 0;  //!< malformed or out-of-tolerance rows
    std::vector<std::string> skipped_log;  //!< one line per skipped row (capped)
};

//! Parse a CSV-ish point file. A non-numeric first row is treated as a header.
//! Malformed rows are skipped and logged; xyz rows are renormalized when their
//! norm is within [0.99, 1.01] and rejected otherwise. Throws ValidationError
//! when the file is unreadable, yields no points, or loses more than half of
//! its data rows.
Dataset ingest(const std::string& path, DataFormat format);
Dataset ingest_text(const std::string& text, DataFormat format, const std::string& origin);

//! Write points in the given format (with a header row); the inverse of
//! ingest up to floating-point round-trip.
void export_points(const std::vector<UnitVector>& points, const std::string& path,
                   DataFormat format);

} // namespace dirhdr
