// Writes the synthetic demo scene: make_demo_scene [dir] [seed]

#include <cstdlib>
#include <iostream>

#include "demo_scene.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data/demo";
  const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 7;
  try {
    std::cout << demo::write_scene(dir, seed).string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
