#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mixedop::cli {

/// Artifact version embedded in every report.
std::string version();

/// %.17g; reads back to the same double.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

/// Files of one run, kept in memory until the whole run has succeeded.
struct Artifacts {
  struct File {
    std::string name;  ///< relative path, may contain a subdirectory
    std::string content;
  };
  std::vector<File> files;

  void add_json(const std::string& name, const nlohmann::ordered_json& j);
  void add_csv(const std::string& name, const CsvTable& t);
  void add_text(const std::string& name, std::string content);
  /// Moves every file of `sub` under `prefix/`.
  void nest(const std::string& prefix, Artifacts sub);
};

/// Writes the artifacts to a fresh sibling directory of `target`, then renames it onto
/// `target` (an existing target is replaced). Nothing is left behind on failure.
void commit(const Artifacts& artifacts, const std::filesystem::path& target);

}  // namespace mixedop::cli
