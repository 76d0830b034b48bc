// Regenerates the bundled synthetic maps under maps/.
#include <iostream>

#include "crashsearch/experiment.hpp"

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "maps";
  std::filesystem::create_directories(out_dir);
  for (const std::string& name : crashsearch::fixture_names()) {
    const crashsearch::RoadNetwork net = crashsearch::make_fixture(name);
    const std::string path = out_dir + "/" + name + ".json";
    crashsearch::write_text_file(path, crashsearch::save_network(net));
    std::cout << path << ": " << net.lane_count() << " lanes\n";
  }
  return 0;
}
