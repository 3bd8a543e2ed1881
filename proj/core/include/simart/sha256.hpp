#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace simart {

// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();

  void update(const void* data, std::size_t len);
  void update(const std::string& data) { update(data.data(), data.size()); }

  // Finalizes; the object must not be updated afterwards.
  std::array<std::uint8_t, 32> digest();
  std::string hex_digest();

 private:
  void process_block(const std::uint8_t* block);

  std::array<std::uint32_t, 8> state_;
  std::array<std::uint8_t, 64> buffer_;
  std::uint64_t total_ = 0;
  std::size_t buffered_ = 0;
  bool done_ = false;
};

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::string& path);

}  // namespace simart
