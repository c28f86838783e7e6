#include "kaes/binary_io.hpp"

#include <bit>
#include <cstring>

#include "kaes/error.hpp"

namespace kaes::io {

namespace {

template <typename U>
void put_le(std::ostream& out, U v) {
  char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf, sizeof(U));
}

template <typename U>
U get_le(const char* buf) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    v |= static_cast<U>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

}  // namespace

void write_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }
void write_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
void write_f32(std::ostream& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
void write_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void write_string(std::ostream& out, std::string_view s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void Reader::read_exact(char* dst, std::size_t n, std::string_view what) {
  in_.read(dst, static_cast<std::streamsize>(n));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got != n) {
    throw FormatError("truncated input at byte offset " + std::to_string(offset_ + got) +
                      " while reading " + std::string(what) + ": expected " + std::to_string(n) +
                      " bytes, " + std::to_string(got) + " available");
  }
  offset_ += n;
}

std::uint8_t Reader::u8(std::string_view what) {
  char c;
  read_exact(&c, 1, what);
  return static_cast<std::uint8_t>(c);
}

std::uint32_t Reader::u32(std::string_view what) {
  char buf[4];
  read_exact(buf, 4, what);
  return get_le<std::uint32_t>(buf);
}

std::uint64_t Reader::u64(std::string_view what) {
  char buf[8];
  read_exact(buf, 8, what);
  return get_le<std::uint64_t>(buf);
}

float Reader::f32(std::string_view what) { return std::bit_cast<float>(u32(what)); }
double Reader::f64(std::string_view what) { return std::bit_cast<double>(u64(what)); }

std::string Reader::string(std::string_view what) {
  const std::uint32_t n = u32(what);
  std::string s(n, '\0');
  read_exact(s.data(), n, what);
  return s;
}

void Reader::expect_magic(std::string_view magic) {
  std::string got(magic.size(), '\0');
  read_exact(got.data(), got.size(), "magic");
  if (got != magic)
    throw FormatError("bad magic: expected \"" + std::string(magic) + "\"");
}

int Reader::peek() {
  const auto c = in_.peek();
  return c == std::char_traits<char>::eof() ? -1 : static_cast<unsigned char>(c);
}

int Reader::get() {
  const auto c = in_.get();
  if (c == std::char_traits<char>::eof()) return -1;
  ++offset_;
  return static_cast<unsigned char>(c);
}

}  // namespace kaes::io
