#pragma once

#include "commgp/policy.hpp"
#include "commgp/types.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace commgp {

// Package wire format, little-endian, float32 payload:
//   0x43 0x4D | version 0x01 | agent_id u16 | region_id u16 | m u8 |
//   4m location f32 | m mean f32 | m(m+1)/2 upper-triangle covariance f32
// Total size 8 + 4 (4m + m + m(m+1)/2) bytes.
inline constexpr std::uint8_t kWireMagic0 = 0x43;
inline constexpr std::uint8_t kWireMagic1 = 0x4D;
inline constexpr std::uint8_t kWireVersion = 0x01;

std::size_t encoded_package_size(int m);

std::vector<std::uint8_t> encode_package(const InducingPackage &package);

// Inverse of encode_package; rejects bad magic, unsupported versions,
// truncated payloads, and covariance blocks that fail Cholesky after jitter.
InducingPackage decode_package(std::span<const std::uint8_t> bytes,
                               double jitter = kDefaultJitter);

// File container: a sequence of [u32 little-endian length | encoded package].
void write_package_file(const std::string &path,
                        const std::vector<InducingPackage> &packages);
std::vector<InducingPackage> read_package_file(const std::string &path,
                                               double jitter = kDefaultJitter);

} // namespace commgp
