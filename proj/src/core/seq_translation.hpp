#pragma once

#include <cstdint>
#include <span>

namespace mosto {

// 32-bit TCP sequence arithmetic (RFC 793 / RFC 1982 comparisons).
inline std::int32_t seq_diff(std::uint32_t a, std::uint32_t b) { return static_cast<std::int32_t>(a - b); }
inline bool seq_lt(std::uint32_t a, std::uint32_t b) { return seq_diff(a, b) < 0; }
inline bool seq_leq(std::uint32_t a, std::uint32_t b) { return seq_diff(a, b) <= 0; }
inline bool seq_gt(std::uint32_t a, std::uint32_t b) { return seq_diff(a, b) > 0; }
inline bool seq_geq(std::uint32_t a, std::uint32_t b) { return seq_diff(a, b) >= 0; }

namespace tcp_flags {
inline constexpr std::uint8_t kFin = 0x01;
inline constexpr std::uint8_t kSyn = 0x02;
inline constexpr std::uint8_t kPsh = 0x08;
inline constexpr std::uint8_t kAck = 0x10;
}  // namespace tcp_flags

struct TcpHeader {
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint8_t flags = 0;
  std::uint32_t window = 0;
  std::uint16_t checksum = 0;

  bool operator==(const TcpHeader&) const = default;
};

// Internet checksum over the header fields (checksum taken as zero), the
// payload and its length.
std::uint16_t tcp_checksum(const TcpHeader& h, std::span<const std::uint8_t> payload);
bool checksum_valid(const TcpHeader& h, std::span<const std::uint8_t> payload);

// RFC 1624 incremental update for a 32-bit field changing old_value -> new_value.
std::uint16_t checksum_adjust(std::uint16_t checksum, std::uint32_t old_value, std::uint32_t new_value);

// Which half of a spliced connection a segment belongs to. Forward segments
// travel client -> server.
enum class Direction { Forward, Reverse };

// Offsets between the sequence spaces of two joined connections.
//   delta_fwd: added to seq of forward segments, subtracted from ack of
//              reverse segments.
//   delta_rev: added to seq of reverse segments, subtracted from ack of
//              forward segments.
struct SeqTranslation {
  std::uint32_t delta_fwd = 0;
  std::uint32_t delta_rev = 0;

  bool is_identity() const { return delta_fwd == 0 && delta_rev == 0; }
  bool operator==(const SeqTranslation&) const = default;
};

// Rewrites seq/ack (mod 2^32) and patches the checksum incrementally. The
// payload is not touched, so it is not an argument.
TcpHeader translate_segment(const TcpHeader& h, const SeqTranslation& t, Direction dir);
// Exact inverse of translate_segment for the same direction.
TcpHeader untranslate_segment(const TcpHeader& h, const SeqTranslation& t, Direction dir);

}  // namespace mosto
