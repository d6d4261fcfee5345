#pragma once

// Shared layout of the frames and weights files:
//   8-byte magic | u64 LE header length | JSON header | f64 LE payload

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "wortsense/error.hpp"

namespace wortsense::detail {

using Magic = std::array<char, 8>;

inline std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

class ContainerWriter {
 public:
  ContainerWriter(const std::filesystem::path& path, const Magic& magic,
                  const nlohmann::json& header)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
    const std::string text = header.dump();
    out_.write(magic.data(), magic.size());
    write_u64(text.size());
    out_.write(text.data(), static_cast<std::streamsize>(text.size()));
  }

  void write(std::span<const double> values) {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof v);
      write_u64(bits);
    }
  }

  void write(double value) { write(std::span<const double>(&value, 1)); }

  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed for " + path_.string());
  }

 private:
  void write_u64(std::uint64_t v) {
    v = to_little_endian(v);
    char bytes[8];
    std::memcpy(bytes, &v, 8);
    out_.write(bytes, 8);
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

class ContainerReader {
 public:
  ContainerReader(const std::filesystem::path& path, const Magic& magic, const char* what)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string());
    Magic found{};
    in_.read(found.data(), found.size());
    if (!in_ || found != magic) throw IoError(path.string() + " is not a " + what + " file");
    const auto length = read_u64();
    constexpr std::uint64_t kMaxHeader = 1ull << 30;
    if (length > kMaxHeader) throw IoError(path.string() + ": implausible header length");
    std::string text(length, '\0');
    in_.read(text.data(), static_cast<std::streamsize>(length));
    if (!in_) throw IoError(path.string() + ": truncated header");
    try {
      header_ = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(path.string() + ": malformed header: " + e.what());
    }
  }

  const nlohmann::json& header() const { return header_; }
  const std::filesystem::path& path() const { return path_; }

  void read(std::span<double> values) {
    for (double& v : values) {
      std::uint64_t bits = read_u64();
      std::memcpy(&v, &bits, sizeof v);
    }
  }

  double read_one() {
    double v = 0.0;
    read(std::span<double>(&v, 1));
    return v;
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof())
      throw IoError(path_.string() + ": trailing bytes after payload");
  }

 private:
  std::uint64_t read_u64() {
    char bytes[8];
    in_.read(bytes, 8);
    if (!in_) throw IoError(path_.string() + ": truncated payload");
    std::uint64_t v;
    std::memcpy(&v, bytes, 8);
    return to_little_endian(v);
  }

  std::filesystem::path path_;
  std::ifstream in_;
  nlohmann::json header_;
};

}  // namespace wortsense::detail
