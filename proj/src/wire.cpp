#include "commgp/wire.hpp"

#include "commgp/kernel.hpp"

#include <cstring>
#include <fstream>

namespace commgp {

namespace {

void put_u16(std::vector<std::uint8_t> &out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_f32(std::vector<std::uint8_t> &out, double v) {
  const float f = static_cast<float>(v);
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  for (int k = 0; k < 4; ++k)
    out.push_back(static_cast<std::uint8_t>((bits >> (8 * k)) & 0xff));
}

std::uint16_t get_u16(const std::uint8_t *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

double get_f32(const std::uint8_t *p) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k)
    bits |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return static_cast<double>(f);
}

} // namespace

std::size_t encoded_package_size(int m) {
  if (m < 1 || m > 255)
    throw InvalidArgument("encoded_package_size: m must lie in [1, 255]");
  const std::size_t mu = static_cast<std::size_t>(m);
  return 8 + 4 * (4 * mu + mu + mu * (mu + 1) / 2);
}

std::vector<std::uint8_t> encode_package(const InducingPackage &package) {
  const int m = package.m();
  if (m == 0)
    throw WireError("encode_package: empty package");
  if (m > 255)
    throw WireError("encode_package: m exceeds 255");
  if (package.mean.size() != m || package.covariance.rows() != m ||
      package.covariance.cols() != m)
    throw WireError("encode_package: inconsistent package fields");

  std::vector<std::uint8_t> out;
  out.reserve(encoded_package_size(m));
  out.push_back(kWireMagic0);
  out.push_back(kWireMagic1);
  out.push_back(kWireVersion);
  put_u16(out, package.agent_id);
  put_u16(out, package.region_id);
  out.push_back(static_cast<std::uint8_t>(m));

  for (int i = 0; i < m; ++i)
    for (int k = 0; k < 4; ++k)
      put_f32(out, package.locations(i, k));
  for (int i = 0; i < m; ++i)
    put_f32(out, package.mean[i]);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) // upper triangle, row-major
      put_f32(out, package.covariance(i, j));
  return out;
}

InducingPackage decode_package(std::span<const std::uint8_t> bytes, double jitter) {
  if (bytes.size() < 8)
    throw WireError("decode_package: truncated header");
  if (bytes[0] != kWireMagic0 || bytes[1] != kWireMagic1)
    throw WireError("decode_package: bad magic");
  if (bytes[2] != kWireVersion)
    throw WireError("decode_package: unsupported version");

  InducingPackage package;
  package.agent_id = get_u16(bytes.data() + 3);
  package.region_id = get_u16(bytes.data() + 5);
  const int m = bytes[7];
  if (m == 0)
    throw WireError("decode_package: empty package");
  if (bytes.size() != encoded_package_size(m))
    throw WireError("decode_package: truncated payload");

  const std::uint8_t *p = bytes.data() + 8;
  package.locations.resize(m, 4);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < 4; ++k, p += 4)
      package.locations(i, k) = get_f32(p);
  package.mean.resize(m);
  for (int i = 0; i < m; ++i, p += 4)
    package.mean[i] = get_f32(p);
  package.covariance.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j, p += 4) {
      const double v = get_f32(p);
      package.covariance(i, j) = v;
      package.covariance(j, i) = v;
    }

  // validation only; the stored covariance keeps the wire values verbatim
  try {
    cholesky_with_jitter(package.covariance, jitter);
  } catch (const NumericError &) {
    throw WireError("decode_package: covariance not positive definite after jitter");
  }
  return package;
}

void write_package_file(const std::string &path,
                        const std::vector<InducingPackage> &packages) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot open '" + path + "' for writing");
  for (const auto &package : packages) {
    const auto bytes = encode_package(package);
    const auto len = static_cast<std::uint32_t>(bytes.size());
    std::uint8_t hdr[4] = {static_cast<std::uint8_t>(len & 0xff),
                           static_cast<std::uint8_t>((len >> 8) & 0xff),
                           static_cast<std::uint8_t>((len >> 16) & 0xff),
                           static_cast<std::uint8_t>((len >> 24) & 0xff)};
    out.write(reinterpret_cast<const char *>(hdr), 4);
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  if (!out)
    throw IoError("failed writing '" + path + "'");
}

std::vector<InducingPackage> read_package_file(const std::string &path, double jitter) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "' for reading");

  std::vector<InducingPackage> packages;
  for (;;) {
    std::uint8_t hdr[4];
    in.read(reinterpret_cast<char *>(hdr), 4);
    if (in.gcount() == 0 && in.eof())
      break;
    if (in.gcount() != 4)
      throw WireError(path + ": truncated length prefix");
    const std::uint32_t len = static_cast<std::uint32_t>(hdr[0]) |
                              (static_cast<std::uint32_t>(hdr[1]) << 8) |
                              (static_cast<std::uint32_t>(hdr[2]) << 16) |
                              (static_cast<std::uint32_t>(hdr[3]) << 24);
    std::vector<std::uint8_t> bytes(len);
    in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(len));
    if (static_cast<std::uint32_t>(in.gcount()) != len)
      throw WireError(path + ": truncated package body");
    packages.push_back(decode_package(bytes, jitter));
  }
  return packages;
}

} // namespace commgp
