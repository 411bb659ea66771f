#include "mdsenbd/csv_io.hpp"

#include "mdsenbd/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

namespace mdsenbd {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

bool is_period_header(std::string_view cell) {
    std::string lower;
    for (char c : cell) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return lower == "period";
}

std::int64_t parse_count(const std::string& cell, std::size_t row, std::size_t column) {
    if (cell.empty()) {
        throw SchemaError(row, column, "missing count");
    }
    std::int64_t value = 0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (*first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc() && ptr == last) {
        if (value < 0) {
            throw SchemaError(row, column, "negative count '" + cell + "'");
        }
        return value;
    }
    if (ec == std::errc::result_out_of_range) {
        throw SchemaError(row, column, "count out of range '" + cell + "'");
    }
    char* end = nullptr;
    const double numeric = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() + cell.size()) {
        if (numeric < 0.0) {
            throw SchemaError(row, column, "negative count '" + cell + "'");
        }
        throw SchemaError(row, column, "non-integer count '" + cell + "'");
    }
    throw SchemaError(row, column, "not a number '" + cell + "'");
}

}  // namespace

EventSeries read_csv(std::istream& in) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    bool have_header = false;
    bool has_period = false;
    std::vector<std::string> labels;
    std::vector<std::vector<std::int64_t>> rows;

    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (row == 1 && line.starts_with("\xEF\xBB\xBF")) {
            line.erase(0, 3);
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (!have_header) {
            header = std::move(fields);
            have_header = true;
            has_period = is_period_header(header.front());
            const std::size_t first = has_period ? 1 : 0;
            if (header.size() <= first) {
                throw SchemaError(row, header.size(), "header has no count columns");
            }
            for (std::size_t c = first; c < header.size(); ++c) {
                if (header[c].empty()) {
                    throw SchemaError(row, c + 1, "empty sector name");
                }
            }
            continue;
        }
        if (fields.size() != header.size()) {
            throw SchemaError(row, std::min(fields.size(), header.size()) + 1,
                              "expected " + std::to_string(header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        }
        const std::size_t first = has_period ? 1 : 0;
        if (has_period) {
            labels.push_back(fields.front());
        }
        std::vector<std::int64_t> counts;
        counts.reserve(fields.size() - first);
        for (std::size_t c = first; c < fields.size(); ++c) {
            counts.push_back(parse_count(fields[c], row, c + 1));
        }
        rows.push_back(std::move(counts));
    }
    if (in.bad()) {
        throw IoError("read error while parsing CSV");
    }
    if (!have_header) {
        throw SchemaError(1, 1, "missing header row");
    }

    EventSeries series;
    series.sector_names.assign(header.begin() + (has_period ? 1 : 0), header.end());
    series.labels = std::move(labels);
    const auto d = static_cast<Eigen::Index>(series.sector_names.size());
    series.counts.resize(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (Eigen::Index i = 0; i < d; ++i) {
            series.counts(static_cast<Eigen::Index>(t), i) = rows[t][static_cast<std::size_t>(i)];
        }
    }
    return series;
}

EventSeries ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return read_csv(in);
}

namespace {

void write_table(std::ostream& out, const EventSeries& series, bool labelled) {
    series.validate();
    if (labelled) {
        out << "period";
    }
    for (std::size_t i = 0; i < series.sector_names.size(); ++i) {
        if (labelled || i > 0) {
            out << ',';
        }
        out << series.sector_names[i];
    }
    out << '\n';
    for (Eigen::Index t = 0; t < series.counts.rows(); ++t) {
        if (labelled) {
            out << series.labels[static_cast<std::size_t>(t)];
        }
        for (Eigen::Index i = 0; i < series.counts.cols(); ++i) {
            if (labelled || i > 0) {
                out << ',';
            }
            out << series.counts(t, i);
        }
        out << '\n';
    }
}

void write_table(const std::filesystem::path& path, const EventSeries& series, bool labelled) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    write_table(out, series, labelled);
    out.flush();
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

}  // namespace

void write_csv(std::ostream& out, const EventSeries& series) {
    write_table(out, series, !series.labels.empty());
}

void write_csv(const std::filesystem::path& path, const EventSeries& series) {
    write_table(path, series, !series.labels.empty());
}

EventSeries generate_synthetic(const ModelSpec& spec,
                               std::size_t horizon,
                               std::uint64_t seed,
                               const std::filesystem::path& path,
                               const SimulationOptions& options) {
    EventSeries series = simulate(spec, horizon, seed, options);
    series.labels.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        series.labels[t] = std::to_string(t + 1);
    }
    // always labelled, so an empty horizon still writes the period header
    write_table(path, series, true);
    return series;
}

}  // namespace mdsenbd
