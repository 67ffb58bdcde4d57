#include "esncast/io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace esncast::io {

namespace {

std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::io_error, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::io_error, "cannot write " + path.string());
    return out;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool next_data_line(std::istream& in, std::string& line, std::size_t& lineno)
{
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty())
            return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos)
            break;
        start = pos + 1;
    }
    return out;
}

std::string format_double(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_double(const std::string& text, const std::string& what)
{
    if (text.empty())
        throw Error(Errc::parse_error, what + ": missing value");
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (*first == '+')
        ++first;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last)
        throw Error(Errc::parse_error, what + ": '" + text + "' is not a number");
    if (!std::isfinite(v))
        throw Error(Errc::parse_error, what + ": non-finite value");
    return v;
}

Series read_series(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    if (!next_data_line(in, line, lineno))
        throw Error(Errc::parse_error, "series file is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.front() != "time")
        throw Error(Errc::parse_error, "series header must be time,<element>,...");
    Series s;
    s.names.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> rows;
    while (next_data_line(in, line, lineno)) {
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw Error(Errc::parse_error, "line " + std::to_string(lineno) + ": expected " +
                                               std::to_string(header.size()) + " fields, found " +
                                               std::to_string(cells.size()));
        s.time.push_back(cells.front());
        std::vector<double> row;
        for (std::size_t k = 1; k < cells.size(); ++k)
            row.push_back(parse_double(cells[k], "line " + std::to_string(lineno) + ", column " + header[k]));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw Error(Errc::parse_error, "series file has no data rows");
    s.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(s.names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            s.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return s;
}

Series read_series(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return read_series(in);
}

void write_series(std::ostream& out, const Series& s)
{
    if (static_cast<Index>(s.names.size()) != s.values.cols() ||
        (!s.time.empty() && static_cast<Index>(s.time.size()) != s.values.rows()))
        throw Error(Errc::dimension_mismatch, "series labels do not match the values");
    out << "time";
    for (const auto& n : s.names)
        out << ',' << n;
    out << '\n';
    for (Index i = 0; i < s.values.rows(); ++i) {
        out << (s.time.empty() ? std::to_string(i) : s.time[static_cast<std::size_t>(i)]);
        for (Index j = 0; j < s.values.cols(); ++j)
            out << ',' << format_double(s.values(i, j));
        out << '\n';
    }
}

void write_series(const std::filesystem::path& path, const Series& s)
{
    auto out = open_out(path);
    write_series(out, s);
}

Stations read_stations(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    if (!next_data_line(in, line, lineno))
        throw Error(Errc::parse_error, "station file is empty");
    if (split_csv_line(line) != std::vector<std::string>{"id", "lon", "lat"})
        throw Error(Errc::parse_error, "station header must be id,lon,lat");
    Stations s;
    std::vector<Point> pts;
    while (next_data_line(in, line, lineno)) {
        const auto cells = split_csv_line(line);
        const std::string where = "line " + std::to_string(lineno);
        if (cells.size() != 3)
            throw Error(Errc::parse_error, where + ": expected id,lon,lat");
        if (cells[0].empty())
            throw Error(Errc::parse_error, where + ": missing station id");
        s.id.push_back(cells[0]);
        pts.emplace_back(parse_double(cells[1], where + ", lon"), parse_double(cells[2], where + ", lat"));
    }
    s.coords.resize(static_cast<Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i)
        s.coords.row(static_cast<Index>(i)) = pts[i].transpose();
    return s;
}

Stations read_stations(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return read_stations(in);
}

void write_stations(std::ostream& out, const Stations& s)
{
    out << "id,lon,lat\n";
    for (std::size_t i = 0; i < s.id.size(); ++i)
        out << s.id[i] << ',' << format_double(s.coords(static_cast<Index>(i), 0)) << ','
            << format_double(s.coords(static_cast<Index>(i), 1)) << '\n';
}

void write_stations(const std::filesystem::path& path, const Stations& s)
{
    auto out = open_out(path);
    write_stations(out, s);
}

namespace {

Ring parse_ring(const nlohmann::json& coords)
{
    Ring r;
    for (const auto& p : coords) {
        if (!p.is_array() || p.size() < 2)
            throw Error(Errc::parse_error, "polygon vertex must be [lon, lat]");
        r.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    if (r.size() > 1 && r.front() == r.back())
        r.pop_back();
    return r;
}

}  // namespace

DistrictSet read_districts(std::istream& in)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("districts: ") + e.what());
    }
    if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
        throw Error(Errc::parse_error, "districts must be a GeoJSON FeatureCollection");
    DistrictSet set;
    try {
        for (const auto& f : doc.at("features")) {
            District d;
            const auto& props = f.at("properties");
            if (props.contains("id"))
                d.id = props["id"].is_string() ? props["id"].get<std::string>() : props["id"].dump();
            else if (f.contains("id"))
                d.id = f["id"].is_string() ? f["id"].get<std::string>() : f["id"].dump();
            else
                d.id = std::to_string(set.districts.size());
            if (!props.contains("population"))
                throw Error(Errc::parse_error, "district " + d.id + " lacks a population");
            d.population = props["population"].get<std::int64_t>();
            const auto& geom = f.at("geometry");
            const std::string type = geom.at("type").get<std::string>();
            if (type == "Polygon") {
                d.parts.push_back(parse_ring(geom.at("coordinates").at(0)));
            } else if (type == "MultiPolygon") {
                for (const auto& poly : geom.at("coordinates"))
                    d.parts.push_back(parse_ring(poly.at(0)));
            } else {
                throw Error(Errc::parse_error, "district " + d.id + " has unsupported geometry " + type);
            }
            set.districts.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("districts: ") + e.what());
    }
    set.validate();
    return set;
}

DistrictSet read_districts(const std::filesystem::path& path)
{
    auto in = open_in(path);
    return read_districts(in);
}

void write_districts(std::ostream& out, const DistrictSet& set)
{
    nlohmann::json features = nlohmann::json::array();
    for (const District& d : set.districts) {
        nlohmann::json polys = nlohmann::json::array();
        for (const Ring& r : d.parts) {
            nlohmann::json ring = nlohmann::json::array();
            for (const Point& p : r)
                ring.push_back({p.x(), p.y()});
            ring.push_back({r.front().x(), r.front().y()});
            polys.push_back(nlohmann::json::array({ring}));
        }
        nlohmann::json geom = d.parts.size() == 1
                                  ? nlohmann::json{{"type", "Polygon"}, {"coordinates", polys[0]}}
                                  : nlohmann::json{{"type", "MultiPolygon"}, {"coordinates", polys}};
        features.push_back({{"type", "Feature"},
                            {"properties", {{"id", d.id}, {"population", d.population}}},
                            {"geometry", geom}});
    }
    out << nlohmann::json{{"type", "FeatureCollection"}, {"features", features}}.dump(1) << '\n';
}

void write_districts(const std::filesystem::path& path, const DistrictSet& d)
{
    auto out = open_out(path);
    write_districts(out, d);
}

}  // namespace esncast::io
