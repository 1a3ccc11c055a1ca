#include "eapm/io.hpp"

#include <cstdio>
#include <fstream>

#include "eapm/errors.hpp"

namespace eapm {

std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string csv_to_string(const std::vector<std::string>& header, const Table& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw IoError("csv row width does not match header");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (row[i]) out += format_g12(*row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string json_table_to_string(const std::vector<std::string>& header,
                                 const Table& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
        if (row.size() != header.size()) {
            throw IoError("json row width does not match header");
        }
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i]) {
                obj[header[i]] = *row[i];
            } else {
                obj[header[i]] = nullptr;
            }
        }
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << content;
    f.flush();
    if (!f) throw IoError("write failed: " + path);
}

nlohmann::json strategy_to_json(const ClassicalStrategy& s) {
    nlohmann::json j;
    j["q"] = s.q;
    nlohmann::json enc = nlohmann::json::array();
    for (const auto& e : s.encoder) {
        nlohmann::json mat = nlohmann::json::array();
        for (Eigen::Index a = 0; a < e.rows(); ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index x = 0; x < e.cols(); ++x) row.push_back(e(a, x));
            mat.push_back(std::move(row));
        }
        enc.push_back(std::move(mat));
    }
    j["encoder"] = std::move(enc);
    nlohmann::json dec = nlohmann::json::array();
    for (const auto& per_y : s.decoder) {
        nlohmann::json ys = nlohmann::json::array();
        for (const auto& d : per_y) {
            nlohmann::json mat = nlohmann::json::array();
            for (Eigen::Index b = 0; b < d.rows(); ++b) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index a = 0; a < d.cols(); ++a) row.push_back(d(b, a));
                mat.push_back(std::move(row));
            }
            ys.push_back(std::move(mat));
        }
        dec.push_back(std::move(ys));
    }
    j["decoder"] = std::move(dec);
    return j;
}

}  // namespace eapm
