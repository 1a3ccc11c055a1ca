#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eapm/classical.hpp"

namespace eapm {

using Cell = std::optional<double>;
using Table = std::vector<std::vector<Cell>>;

// 12 significant digits, shortest form ("%.12g").
std::string format_g12(double v);

std::string csv_to_string(const std::vector<std::string>& header, const Table& rows);
std::string json_table_to_string(const std::vector<std::string>& header,
                                 const Table& rows);

void write_text_file(const std::string& path, const std::string& content);

nlohmann::json strategy_to_json(const ClassicalStrategy& s);

}  // namespace eapm
