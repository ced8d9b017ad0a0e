// Writes CLI test inputs under argv[1]: features/, images/, gt.json, results.json,
// schedule.cfg and pipeline.cfg.

#include <fstream>
#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: hacl_make_fixtures DIR\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::remove_all(dir);
  hacl::testing::write_scene_dir(dir, 4, 99);

  std::ofstream(dir / "gt.json") << R"({"images":[{"id":1,"width":100,"height":100}],
  "annotations":[{"id":1,"image_id":1,"bbox":[0,0,10,10],"area":100},
                 {"id":2,"image_id":1,"bbox":[50,50,10,10],"area":100}]})";
  std::ofstream(dir / "results.json") << R"([{"image_id":1,"bbox":[0,0,10,10],"score":0.9},
  {"image_id":1,"bbox":[20,20,10,10],"score":0.8},
  {"image_id":1,"bbox":[50,50,10,10],"score":0.7}])";
  std::ofstream(dir / "broken.json") << R"({"images": [{"id": 1,}]})";
  std::ofstream(dir / "schedule.cfg") << "total_iters = 100\nburn_in_iters = 20\n";
  std::ofstream(dir / "pipeline.cfg") << "# test config\nthresholds = 0.4, 0.2, 0.1\ncrf = on\nworkers = 2\n";
  std::ofstream(dir / "bad.cfg") << "thresholds = 0.4\nunknown_key = 3\n";
  return 0;
}
