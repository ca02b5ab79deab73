#include "lab/output.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "kds/error.hpp"

namespace lab {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Output::Output(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) kds::fail(kds::ErrorCode::IoError, "cannot create output directory " + dir_.string());
}

fs::path Output::prepare(const std::string& name) {
  const fs::path p = dir_ / name;
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) kds::fail(kds::ErrorCode::IoError, "cannot create " + p.parent_path().string());
  if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
  return p;
}

void Output::json(const std::string& name, const Json& j) {
  if (!enabled()) return;
  std::ofstream out(prepare(name), std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) kds::fail(kds::ErrorCode::IoError, "cannot write " + name);
}

void Output::csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  if (!enabled()) return;
  std::ofstream out(prepare(name), std::ios::binary);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  if (!out) kds::fail(kds::ErrorCode::IoError, "cannot write " + name);
}

void Output::snapshot(const std::string& stem, const kds::StateVector& s, const kds::Grid2D& g,
                      const std::vector<std::string>& components) {
  if (!enabled()) return;
  std::vector<char> bytes;
  bytes.reserve(2 * (s.u.size() + s.v.size()) * sizeof(double));
  auto put = [&](double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char raw[8];
    std::memcpy(raw, &bits, 8);
    bytes.insert(bytes.end(), raw, raw + 8);
  };
  for (const auto* field : {&s.u, &s.v})
    for (const kds::cd& z : *field) {
      put(z.real());
      put(z.imag());
    }
  {
    std::ofstream out(prepare(stem + ".bin"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) kds::fail(kds::ErrorCode::IoError, "cannot write " + stem + ".bin");
  }
  Json side;
  side["grid"] = {{"n_r", g.n_r},         {"n_theta", g.n_theta},         {"r_min", g.r_min},
                  {"r_max", g.r_max},     {"spacing_r", g.spacing_r},     {"spacing_theta", g.spacing_theta},
                  {"theta_nodes", "staggered: (j + 1/2) spacing_theta"}};
  side["mode"] = g.mode_m;
  side["components"] = components;
  side["t_star"] = s.t_star;
  side["dtype"] = "float64, little-endian";
  side["layout"] = "[field u, v][component][r][theta][re, im]";
  json(stem + ".json", side);
}

std::vector<Output::Entry> Output::artifacts() const {
  std::vector<Entry> out;
  for (const auto& n : names_) out.push_back({n, fs::file_size(dir_ / n)});
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
  return out;
}

}  // namespace lab
