#pragma once
#include <string>
#include <vector>

#include "stitchfold/mesh.hpp"

namespace stitchfold {

// Built-in parametric test models: ten disk-topology surfaces spanning the
// shape families the converter targets (caps, saddles, fold patterns, ruled
// surfaces, relief). Every model keeps edges >= 8.4mm and stays under 200
// faces so a conversion finishes in seconds.
std::vector<std::string> corpus_names();
TriangleMesh corpus_model(const std::string& name);  // throws UnknownModel

// Writes <name>.obj for each model into dir (created if missing).
void write_corpus(const std::string& dir);

// Deliberately unconvertible: a ruffled fan piling ~4 full turns of surface
// around one vertex. The layout cannot spread that much material flat, so
// resolution gives up and implicates the vertex.
TriangleMesh spike_mesh();

// Closed surfaces for the topology gate: no boundary, so neither is a disk.
TriangleMesh closed_sphere();  // icosahedron, needs 1 cut
TriangleMesh closed_torus();   // quad torus, needs 2 cuts

}  // namespace stitchfold
