#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "dmuq/error.hpp"

int main(int argc, char** argv) {
  dmuq::set_warning_sink([](std::string_view) {});
  doctest::Context context(argc, argv);
  return context.run();
}
