#include <stddef.h>
#include <stdint.h>

uint32_t adler32(const uint8_t *data, size_t len) {
  uint32_t a = 1, b = 0;
  for (size_t i = 0; i < len; ++i) {
    a = (a + data[i]) % 65521;
    b = (b + a) % 65521;
  }
  return (b << 16) | a;
}

int main(void) {
  static const uint8_t msg[] = "Wikipedia";
  return adler32(msg, 9) == 0x11E60398u ? 0 : 1;
}
