#include "seq_translation.hpp"

namespace mosto {

namespace {

std::uint32_t fold(std::uint64_t sum) {
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint32_t>(sum);
}

std::uint64_t add32(std::uint64_t sum, std::uint32_t v) { return sum + (v >> 16) + (v & 0xFFFF); }

std::uint64_t header_sum(const TcpHeader& h, std::size_t payload_len) {
  std::uint64_t sum = 0;
  sum += h.src_port;
  sum += h.dst_port;
  sum = add32(sum, h.seq);
  sum = add32(sum, h.ack);
  sum += h.flags;
  sum = add32(sum, h.window);
  sum = add32(sum, static_cast<std::uint32_t>(payload_len));
  return sum;
}

std::uint64_t payload_sum(std::span<const std::uint8_t> payload) {
  std::uint64_t sum = 0;
  std::size_t i = 0;
  for (; i + 1 < payload.size(); i += 2) sum += (static_cast<std::uint32_t>(payload[i]) << 8) | payload[i + 1];
  if (i < payload.size()) sum += static_cast<std::uint32_t>(payload[i]) << 8;
  return sum;
}

}  // namespace

std::uint16_t tcp_checksum(const TcpHeader& h, std::span<const std::uint8_t> payload) {
  return static_cast<std::uint16_t>(~fold(header_sum(h, payload.size()) + payload_sum(payload)) & 0xFFFF);
}

bool checksum_valid(const TcpHeader& h, std::span<const std::uint8_t> payload) {
  return fold(header_sum(h, payload.size()) + payload_sum(payload) + h.checksum) == 0xFFFF;
}

std::uint16_t checksum_adjust(std::uint16_t checksum, std::uint32_t old_value, std::uint32_t new_value) {
  // HC' = ~(~HC + ~m + m') applied to both 16-bit halves.
  std::uint64_t sum = static_cast<std::uint16_t>(~checksum);
  sum += static_cast<std::uint16_t>(~(old_value >> 16));
  sum += static_cast<std::uint16_t>(~(old_value & 0xFFFF));
  sum += new_value >> 16;
  sum += new_value & 0xFFFF;
  return static_cast<std::uint16_t>(~fold(sum) & 0xFFFF);
}

namespace {

TcpHeader shift(const TcpHeader& h, std::uint32_t seq_delta, std::uint32_t ack_delta) {
  TcpHeader out = h;
  out.seq = h.seq + seq_delta;
  out.ack = h.ack - ack_delta;
  out.checksum = checksum_adjust(out.checksum, h.seq, out.seq);
  out.checksum = checksum_adjust(out.checksum, h.ack, out.ack);
  return out;
}

}  // namespace

TcpHeader translate_segment(const TcpHeader& h, const SeqTranslation& t, Direction dir) {
  return dir == Direction::Forward ? shift(h, t.delta_fwd, t.delta_rev) : shift(h, t.delta_rev, t.delta_fwd);
}

TcpHeader untranslate_segment(const TcpHeader& h, const SeqTranslation& t, Direction dir) {
  return dir == Direction::Forward ? shift(h, 0u - t.delta_fwd, 0u - t.delta_rev)
                                   : shift(h, 0u - t.delta_rev, 0u - t.delta_fwd);
}

}  // namespace mosto
