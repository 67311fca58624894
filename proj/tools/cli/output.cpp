#include "cli/output.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <system_error>

#ifndef MIXEDOP_VERSION
#define MIXEDOP_VERSION "0.0.0"
#endif

namespace mixedop::cli {

namespace fs = std::filesystem;

std::string version() { return MIXEDOP_VERSION; }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void Artifacts::add_json(const std::string& name, const nlohmann::ordered_json& j) {
  files.push_back({name, j.dump(2) + "\n"});
}

void Artifacts::add_csv(const std::string& name, const CsvTable& t) { files.push_back({name, t.str()}); }

void Artifacts::add_text(const std::string& name, std::string content) { files.push_back({name, std::move(content)}); }

void Artifacts::nest(const std::string& prefix, Artifacts sub) {
  for (File& f : sub.files) files.push_back({prefix + "/" + f.name, std::move(f.content)});
}

void commit(const Artifacts& artifacts, const fs::path& target) {
  const fs::path absolute = fs::absolute(target).lexically_normal();
  const fs::path parent = absolute.parent_path();
  fs::create_directories(parent);
  std::random_device rd;
  const std::string tag = std::to_string(rd()) + std::to_string(rd());
  const fs::path staging = parent / ("." + absolute.filename().string() + ".tmp-" + tag);
  const fs::path retired = parent / ("." + absolute.filename().string() + ".old-" + tag);
  try {
    fs::create_directory(staging);
    for (const auto& f : artifacts.files) {
      const fs::path p = staging / f.name;
      fs::create_directories(p.parent_path());
      std::ofstream out(p, std::ios::binary);
      out << f.content;
      out.close();
      if (!out) throw std::runtime_error("failed to write " + p.string());
    }
    if (fs::exists(absolute)) fs::rename(absolute, retired);
    fs::rename(staging, absolute);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    if (fs::exists(retired, ec) && !fs::exists(absolute, ec)) fs::rename(retired, absolute, ec);
    throw;
  }
  std::error_code ec;
  fs::remove_all(retired, ec);
}

}  // namespace mixedop::cli
