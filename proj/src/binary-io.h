// Little-endian scalar encoding for the binary containers.

#ifndef SHARC_SRC_BINARY_IO_H_
#define SHARC_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>

namespace sharc::internal {

template <typename T>
void WriteLe(std::ostream &os, T value) {
  using U = std::conditional_t<sizeof(T) == 8, uint64_t, uint32_t>;
  U bits = std::bit_cast<U>(value);
  char buf[sizeof(U)];
  for (size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(buf, sizeof(U));
}

// Returns false on short read.
template <typename T>
bool ReadLe(std::istream &is, T *value) {
  using U = std::conditional_t<sizeof(T) == 8, uint64_t, uint32_t>;
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char *>(buf), sizeof(U))) return false;
  U bits = 0;
  for (size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
  *value = std::bit_cast<T>(bits);
  return true;
}

}  // namespace sharc::internal

#endif  // SHARC_SRC_BINARY_IO_H_
