#include "mdsenbd/cli/output.hpp"

#include "mdsenbd/cli/config.hpp"
#include "mdsenbd/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mdsenbd::cli {

nlohmann::json number(double value) {
    if (!std::isfinite(value)) {
        return format_number(value);
    }
    return std::strtod(format_number(value).c_str(), nullptr);
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(number(v(i)));
    }
    return out;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out.push_back(vector_json(m.row(i).transpose()));
    }
    return out;
}

std::string Table::to_csv() const {
    std::ostringstream out;
    const auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c > 0) {
                out << ',';
            }
            out << cells[c];
        }
        out << '\n';
    };
    line(header);
    for (const auto& r : rows) {
        line(r);
    }
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    out.flush();
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

std::string dump(const nlohmann::json& document) { return document.dump(2) + "\n"; }

}  // namespace mdsenbd::cli
