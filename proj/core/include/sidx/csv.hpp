#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sidx/model.hpp"

namespace sidx {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Reads a header-first, comma-separated numeric table. The response column is
/// removed and becomes y; the remaining columns form X in file order.
/// Missing columns raise a schema (config) error; bad cells report row and column.
Dataset ingest_csv(const std::filesystem::path& path, const std::string& response);
Dataset ingest_csv(std::istream& in, const std::string& response, const std::string& source = "<stream>");

/// Writes x1..xp followed by the response column `response`.
void write_dataset_csv(const Dataset& data, std::ostream& out, const std::string& response = "y");

}  // namespace sidx
