#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "rs3/mpc.hpp"

namespace rs3::harness {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text)
{
    while (!text.empty() && (text.back() == '\r' || text.back() == ' ' || text.back() == '\t'))
        text.remove_suffix(1);
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    if (text == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return v;
}

/// Column names of the trajectory CSV for an episode record.
inline std::vector<std::string> trajectory_header(const std::vector<std::string>& state_names,
                                                  const std::vector<std::string>& control_names,
                                                  const std::vector<std::string>& belief_names)
{
    std::vector<std::string> cols{"step"};
    cols.insert(cols.end(), state_names.begin(), state_names.end());
    cols.insert(cols.end(), control_names.begin(), control_names.end());
    for (const auto& n : belief_names)
        cols.push_back("belief_" + n);
    for (const auto& n : belief_names)
        cols.push_back("band_" + n);
    cols.push_back("stage_cost");
    return cols;
}

/// One row per time step 0..L; controls are nan on the final row, where
/// stage_cost holds the terminal cost.
template <System Env>
void write_trajectory_csv(const std::filesystem::path& path, const EpisodeRecord& rec)
{
    std::vector<std::string> states(Env::state_names.begin(), Env::state_names.end());
    std::vector<std::string> controls(Env::control_names.begin(), Env::control_names.end());
    const auto header = trajectory_header(states, controls, rec.belief_names);

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << header[i];
    out << '\n';
    const Eigen::Index rows = rec.states.rows();
    for (Eigen::Index t = 0; t < rows; ++t) {
        out << t;
        for (Eigen::Index d = 0; d < rec.states.cols(); ++d)
            out << ',' << format_double(rec.states(t, d));
        for (Eigen::Index d = 0; d < rec.controls.cols(); ++d)
            out << ',' << (t < rec.controls.rows() ? format_double(rec.controls(t, d)) : "nan");
        for (Eigen::Index d = 0; d < rec.belief_mean.cols(); ++d)
            out << ',' << format_double(rec.belief_mean(t, d));
        for (Eigen::Index d = 0; d < rec.belief_band.cols(); ++d)
            out << ',' << format_double(rec.belief_band(t, d));
        out << ',' << format_double(rec.stage_costs[static_cast<std::size_t>(t)]) << '\n';
    }
    if (!out)
        throw std::runtime_error("failed writing " + path.string());
}

/// Parsed trajectory CSV: header plus a rows x columns table.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw std::out_of_range("no column '" + std::string(name) + "'");
    }
};

inline CsvTable read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    CsvTable table;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= s.size(); ++i)
            if (i == s.size() || s[i] == ',') {
                parts.push_back(s.substr(start, i - start));
                start = i + 1;
            }
        return parts;
    };
    if (!std::getline(in, line))
        throw std::runtime_error(path.string() + ": missing header row");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    table.header = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r")
            continue;
        const auto parts = split(line);
        if (parts.size() != table.header.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(table.header.size()) + " fields");
        std::vector<double> row;
        row.reserve(parts.size());
        for (const auto& p : parts)
            row.push_back(parse_double(p));
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// One cost per line, in episode order.
inline void write_costs_csv(const std::filesystem::path& path, std::span<const double> costs)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    for (double c : costs)
        out << format_double(c) << '\n';
    if (!out)
        throw std::runtime_error("failed writing " + path.string());
}

/// Reads one real per line; blank lines are skipped. Throws on a malformed
/// line or an empty file.
inline std::vector<double> read_costs_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            out.push_back(parse_double(line));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!std::isfinite(out.back()))
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": cost must be finite");
    }
    if (out.empty())
        throw std::runtime_error(path.string() + ": no costs");
    return out;
}

} // namespace rs3::harness
