#include "eldiff/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "eldiff/errors.hpp"

namespace eldiff {

namespace {

constexpr char kMagic[8] = {'E', 'L', 'D', 'S', 'N', 'A', 'P', '1'};

template <class T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& out, T v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw IoError("truncated snapshot file " + path.string());
  }
  return byteswap_if_big(v);
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void ensure_directory(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::out | std::ios::trunc);
  out << text;
  finish(out, path);
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::string text;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) text += ',';
    text += table.columns[i];
  }
  text += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) {
      throw IoError("row width does not match header while writing " + path.string());
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += format_double(row[i]);
    }
    text += '\n';
  }
  write_text(path, text);
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV file " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in " + path.string());
      }
    }
    if (row.size() != t.columns.size()) throw IoError("ragged row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_snapshot(const std::filesystem::path& path, const SnapshotFile& s) {
  std::size_t count = 1;
  for (int i = 0; i < s.dim; ++i) count *= static_cast<std::size_t>(s.n);
  for (const auto& f : s.fields) {
    if (f.values.size() != count) {
      throw IoError("field '" + f.name + "' has the wrong size for " + path.string());
    }
  }
  auto out = open_out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.n));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.fields.size()));
  for (const auto& f : s.fields) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.name.size()));
    out.write(f.name.data(), static_cast<std::streamsize>(f.name.size()));
  }
  for (const auto& f : s.fields) {
    for (double x : f.values) put<double>(out, x);
  }
  finish(out, path);
}

SnapshotFile read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw IoError("not a snapshot file: " + path.string());
  }
  SnapshotFile s;
  s.dim = static_cast<int>(get<std::uint32_t>(in, path));
  s.n = static_cast<int>(get<std::uint32_t>(in, path));
  const auto nfields = get<std::uint32_t>(in, path);
  if (s.dim < 1 || s.dim > 3 || s.n < 1 || nfields > 1024) throw IoError("corrupt header in " + path.string());
  std::size_t count = 1;
  for (int i = 0; i < s.dim; ++i) count *= static_cast<std::size_t>(s.n);
  s.fields.resize(nfields);
  for (auto& f : s.fields) {
    const auto len = get<std::uint32_t>(in, path);
    if (len > 4096) throw IoError("corrupt field name in " + path.string());
    f.name.resize(len);
    if (!in.read(f.name.data(), len)) throw IoError("truncated snapshot file " + path.string());
  }
  for (auto& f : s.fields) {
    f.values.resize(count);
    for (auto& x : f.values) x = get<double>(in, path);
  }
  return s;
}

SnapshotFile make_snapshot(const std::vector<std::pair<std::string, const ScalarField*>>& fields) {
  SnapshotFile s;
  for (const auto& [name, field] : fields) {
    if (s.fields.empty()) {
      s.dim = field->grid().dim();
      s.n = field->grid().n();
    }
    const auto v = field->values();
    s.fields.push_back({name, std::vector<double>(v.begin(), v.end())});
  }
  return s;
}

}  // namespace eldiff
