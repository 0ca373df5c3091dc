#include <stddef.h>
#include <stdint.h>

static uint32_t table[256];

static void init_table(void) {
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
}

uint32_t crc32(const uint8_t *data, size_t len) {
  if (table[1] == 0) init_table();
  uint32_t crc = 0xFFFFFFFFu;
  for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

int main(void) {
  static const uint8_t msg[] = "123456789";
  return crc32(msg, 9) == 0xCBF43926u ? 0 : 1;
}
