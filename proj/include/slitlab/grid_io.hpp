#pragma once

#include <iosfwd>
#include <string>

#include "slitlab/fields.hpp"

namespace slitlab {

// CSV grid dump. The first line carries the lattice as
//   # slitlab-grid n=2 h=0.0009765625 first=-512,-512 dims=1024,1024 components=1 mask=0/1
// followed by the header row x1,..,xn,mask,links,flags,v0,.. and one row per cell
// in lattice order. Masked-out cells are written with mask 0.
void write_grid(std::ostream& out, const GridField& f);
GridField read_grid(std::istream& in);

void save_grid(const std::string& path, const GridField& f);
GridField load_grid(const std::string& path);

}  // namespace slitlab
