#include "dirhdr/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dirhdr/errors.hpp"

namespace dirhdr {

namespace {

constexpr double kDegToRad = 0.017453292519943295769;
constexpr std::size_t kSkipLogCap = 100;

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

//! Split a row on commas (or on whitespace when it has no comma).
std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    if (line.find(',') != std::string::npos) {
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            out.push_back(trim(comma == std::string::npos ? line.substr(start)
                                                          : line.substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    } else {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) out.push_back(tok);
    }
    return out;
}

bool parse_field(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

bool numeric_row(const std::vector<std::string>& fields) {
    double ignored = 0.0;
    for (const std::string& f : fields)
        if (!parse_field(f, ignored)) return false;
    return !fields.empty();
}

void log_skip(Dataset& ds, std::size_t lineno, const std::string& why) {
    ++ds.rows_skipped;
    if (ds.skipped_log.size() < kSkipLogCap)
        ds.skipped_log.push_back("line " + std::to_string(lineno) + ": " + why);
    else if (ds.skipped_log.size() == kSkipLogCap)
        ds.skipped_log.push_back("... further skipped rows not logged");
}

} // namespace

DataFormat parse_data_format(const std::string& name) {
    if (name == "angles-rad") return DataFormat::angles_rad;
    if (name == "angles-deg") return DataFormat::angles_deg;
    if (name == "lonlat-deg") return DataFormat::lonlat_deg;
    if (name == "xyz") return DataFormat::xyz;
    throw ValidationError("unknown data format '" + name +
                          "' (valid: angles-rad, angles-deg, lonlat-deg, xyz)");
}

std::string data_format_name(DataFormat format) {
    switch (format) {
        case DataFormat::angles_rad: return "angles-rad";
        case DataFormat::angles_deg: return "angles-deg";
        case DataFormat::lonlat_deg: return "lonlat-deg";
        case DataFormat::xyz: return "xyz";
    }
    throw ValidationError("unknown data format");
}

Dataset ingest_text(const std::string& text, DataFormat format, const std::string& origin) {
    Dataset ds;
    ds.path = origin;
    ds.format = format;
    ds.q = (format == DataFormat::lonlat_deg) ? 2 : 1;  // xyz fixed by first valid row

    int xyz_cols = 0;  // 0 until the first valid xyz row decides 2 or 3
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    bool seen_data_or_header = false;
    while (std::getline(lines, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const std::vector<std::string> fields = split_row(line);
        if (!seen_data_or_header) {
            seen_data_or_header = true;
            if (!numeric_row(fields)) continue;  // header row
        }
        ++ds.rows_total;

        std::vector<double> vals(fields.size());
        bool ok = true;
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (!parse_field(fields[i], vals[i])) {
                ok = false;
                break;
            }
        if (!ok) {
            log_skip(ds, lineno, "non-numeric field");
            continue;
        }

        try {
            switch (format) {
                case DataFormat::angles_rad:
                case DataFormat::angles_deg: {
                    if (vals.size() != 1) {
                        log_skip(ds, lineno, "expected a single angle column");
                        continue;
                    }
                    const double rad =
                        format == DataFormat::angles_deg ? vals[0] * kDegToRad : vals[0];
                    ds.points.push_back(angle_to_unit(rad));
                    break;
                }
                case DataFormat::lonlat_deg: {
                    if (vals.size() != 2) {
                        log_skip(ds, lineno, "expected lon,lat columns");
                        continue;
                    }
                    ds.points.push_back(lonlat_to_unit(vals[0], vals[1]));
                    break;
                }
                case DataFormat::xyz: {
                    if (vals.size() != 2 && vals.size() != 3) {
                        log_skip(ds, lineno, "expected 2 or 3 coordinate columns");
                        continue;
                    }
                    if (xyz_cols == 0) {
                        xyz_cols = static_cast<int>(vals.size());
                        ds.q = xyz_cols - 1;
                    } else if (static_cast<int>(vals.size()) != xyz_cols) {
                        log_skip(ds, lineno, "column count differs from the first row");
                        continue;
                    }
                    const double z = vals.size() == 3 ? vals[2] : 0.0;
                    const double norm = std::sqrt(vals[0] * vals[0] + vals[1] * vals[1] + z * z);
                    if (!(norm >= 0.99 && norm <= 1.01)) {
                        log_skip(ds, lineno, "coordinate norm outside [0.99, 1.01]");
                        continue;
                    }
                    if (vals.size() == 3)
                        ds.points.emplace_back(vals[0], vals[1], vals[2]);
                    else
                        ds.points.emplace_back(vals[0], vals[1]);
                    break;
                }
            }
        } catch (const std::invalid_argument& e) {
            log_skip(ds, lineno, e.what());
        }
    }

    if (ds.rows_total == 0 || ds.points.empty())
        throw ValidationError("ingest: " + origin + " contains no usable data rows");
    if (2 * ds.rows_skipped > ds.rows_total)
        throw ValidationError("ingest: " + origin + ": more than half of the data rows (" +
                              std::to_string(ds.rows_skipped) + "/" +
                              std::to_string(ds.rows_total) + ") were rejected");
    return ds;
}

Dataset ingest(const std::string& path, DataFormat format) {
    std::ifstream in(path);
    if (!in) throw ValidationError("ingest: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ingest_text(ss.str(), format, path);
}

void export_points(const std::vector<UnitVector>& points, const std::string& path,
                   DataFormat format) {
    if (points.empty()) throw ValidationError("export_points: empty point list");
    const int q = points.front().q;
    if (format == DataFormat::lonlat_deg && q != 2)
        throw ValidationError("export_points: lonlat-deg needs sphere points");
    if ((format == DataFormat::angles_rad || format == DataFormat::angles_deg) && q != 1)
        throw ValidationError("export_points: angle formats need circle points");

    std::ofstream out(path);
    if (!out) throw ValidationError("export_points: cannot open " + path);
    char buf[120];
    switch (format) {
        case DataFormat::angles_rad:
            out << "angle_rad\n";
            for (const UnitVector& p : points) {
                std::snprintf(buf, sizeof buf, "%.17g\n", unit_to_angle(p));
                out << buf;
            }
            break;
        case DataFormat::angles_deg:
            out << "angle_deg\n";
            for (const UnitVector& p : points) {
                std::snprintf(buf, sizeof buf, "%.17g\n", unit_to_angle(p) / kDegToRad);
                out << buf;
            }
            break;
        case DataFormat::lonlat_deg:
            out << "lon_deg,lat_deg\n";
            for (const UnitVector& p : points) {
                const std::array<double, 2> ll = unit_to_lonlat(p);
                std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", ll[0], ll[1]);
                out << buf;
            }
            break;
        case DataFormat::xyz:
            out << (q == 1 ? "x,y\n" : "x,y,z\n");
            for (const UnitVector& p : points) {
                if (q == 1)
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x(), p.y());
                else
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.x(), p.y(), p.z());
                out << buf;
            }
            break;
    }
    if (!out) throw ValidationError("export_points: write failed for " + path);
}

} // namespace dirhdr
