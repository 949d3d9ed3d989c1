#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "rtd3/runtime.hpp"

int main(int argc, char** argv) {
  rtd3::configure_allocator();
  doctest::Context context(argc, argv);
  return context.run();
}
