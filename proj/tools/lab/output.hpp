#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kds/evolution.hpp"
#include "lab/config.hpp"

namespace lab {

/// Writes run artifacts under one directory and remembers what was written.
/// A default-constructed Output discards everything (library use).
class Output {
 public:
  Output() = default;
  explicit Output(std::filesystem::path dir);

  bool enabled() const { return !dir_.empty(); }
  const std::filesystem::path& dir() const { return dir_; }

  void json(const std::string& name, const Json& j);
  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows);
  /// Flat little-endian f64 file, layout [field u|v][component][r][theta][re, im],
  /// plus a JSON sidecar with the grid, mode, components and t_star.
  void snapshot(const std::string& stem, const kds::StateVector& s, const kds::Grid2D& g,
                const std::vector<std::string>& components);

  struct Entry {
    std::string name;
    std::uintmax_t bytes;
  };
  std::vector<Entry> artifacts() const;

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
  std::filesystem::path prepare(const std::string& name);
};

std::string format_double(double x);

}  // namespace lab
