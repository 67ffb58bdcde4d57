#pragma once

// Plain-text ingestion and emission: series and station CSV files, GeoJSON
// districts.

#include "esncast/exposure.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace esncast::io {

/// A table whose header is `time,<name_1>,...,<name_n>`.
struct Series {
    std::vector<std::string> time;
    std::vector<std::string> names;
    Matrix values; ///< rows = times, columns = names
};

/// Missing or non-numeric cells raise parse_error with the line number.
Series read_series(std::istream& in);
Series read_series(const std::filesystem::path& path);

/// Writes values with 17 significant digits so that they read back exactly.
void write_series(std::ostream& out, const Series& s);
void write_series(const std::filesystem::path& path, const Series& s);

struct Stations {
    std::vector<std::string> id;
    Locations coords; ///< lon, lat per row
};

/// Header `id,lon,lat`.
Stations read_stations(std::istream& in);
Stations read_stations(const std::filesystem::path& path);
void write_stations(std::ostream& out, const Stations& s);
void write_stations(const std::filesystem::path& path, const Stations& s);

/// FeatureCollection of Polygon or MultiPolygon features. The district id is
/// taken from `properties.id` or the feature `id`, the count from
/// `properties.population`. Interior rings are ignored.
DistrictSet read_districts(std::istream& in);
DistrictSet read_districts(const std::filesystem::path& path);
void write_districts(std::ostream& out, const DistrictSet& d);
void write_districts(const std::filesystem::path& path, const DistrictSet& d);

/// Splits one CSV line on commas; surrounding whitespace is trimmed.
std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Strict full-string number parse; throws parse_error naming `what`.
double parse_double(const std::string& text, const std::string& what);

}  // namespace esncast::io
