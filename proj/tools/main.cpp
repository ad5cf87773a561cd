#include <iostream>

#include "tlspose_app/commands.hpp"

int main(int argc, char** argv) {
  return tlspose::app::run_cli(argc, argv, std::cout, std::cerr);
}
