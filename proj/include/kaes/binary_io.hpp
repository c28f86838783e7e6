#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace kaes::io {

// All multi-byte values are little-endian regardless of host order.

void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_f64(std::ostream& out, double v);
/// u32 byte length followed by the raw bytes.
void write_string(std::ostream& out, std::string_view s);
void write_magic(std::ostream& out, std::string_view magic);

/// Reads from a stream while tracking the byte offset, so truncation errors
/// can say where the data ran out.
class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}

  void read_exact(char* dst, std::size_t n, std::string_view what);
  std::uint8_t u8(std::string_view what);
  std::uint32_t u32(std::string_view what);
  std::uint64_t u64(std::string_view what);
  float f32(std::string_view what);
  double f64(std::string_view what);
  std::string string(std::string_view what);
  void expect_magic(std::string_view magic);
  /// Returns -1 at end of stream without consuming anything.
  int peek();
  int get();

  std::uint64_t offset() const noexcept { return offset_; }

private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace kaes::io
