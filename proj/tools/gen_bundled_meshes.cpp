// Regenerates the bundled mesh files under data/. Maintenance tool; the
// checked-in files are the canonical copies.

#include <cstdio>
#include <string>

#include "eespt/cases.hpp"
#include "eespt/mesh_io.hpp"

int main(int argc, char** argv) {
  std::string dir = (argc > 1) ? argv[1] : "data";
  auto dump = [&](const eespt::BundledCase& c) {
    std::string path = dir + "/" + c.name + ".msh";
    eespt::write_msh(path, c.mesh);
    std::printf("%s: %d nodes, %d elements\n", path.c_str(), c.mesh.num_nodes(),
                c.mesh.num_elements());
  };
  dump(eespt::case_uniform_tension(8));
  dump(eespt::case_plate_hole_2d(25, 40));
  dump(eespt::case_lshape_2d(13));
  dump(eespt::case_plate_hole_3d(4, 8, 2));
  return 0;
}
