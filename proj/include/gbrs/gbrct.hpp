#ifndef GBRS_GBRCT_HPP
#define GBRS_GBRCT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gbrs/dataset.hpp"
#include "gbrs/granular_ball.hpp"
#include "gbrs/roughset.hpp"

namespace gbrs {

enum class NodeKind { positive, boundary };

/// One knowledge point: intent is the ball (center, radius) on the first
/// `layer` reduct attributes, extent is the set of samples it covers.
struct ConceptNode {
    std::size_t id = 0;    // creation index
    std::size_t layer = 1; // 1-based
    AttributeSubset attributes;
    std::vector<double> center;
    double radius = 0.0;
    std::vector<std::size_t> extent; // ascending sample ids
    NodeKind kind = NodeKind::boundary;
    int label = 0; // decision for positive nodes, majority for boundary nodes
    std::vector<std::size_t> children;
};

struct ConceptTree {
    std::vector<ConceptNode> nodes; // creation order, layer by layer
    std::vector<std::size_t> roots;
    Reduct reduct;
    std::vector<std::string> attribute_names; // all condition attributes
    std::vector<std::string> label_names;
    /// Training samples on the reduct attributes, row = sample id.
    std::vector<std::vector<double>> points;

    std::size_t layer_count() const { return reduct.selected.size(); }
    std::size_t layer_attribute(std::size_t layer) const { return reduct.selected[layer - 1]; }
};

struct TreeClassification {
    int label = 0;
    std::vector<std::size_t> path;
    bool confident = true; // false when descent ended on a boundary node
};

/// Layer 1 granulates all of U on the first reduct attribute. Layer k
/// granulates the samples still in boundary nodes, all together, on the
/// length-k prefix; each resulting ball is cut along the layer-(k-1) parents
/// so every piece hangs under exactly one parent. Pieces of pure,
/// non-offending balls become terminating positive nodes.
inline ConceptTree build_tree(const DecisionSystem& ds, const Reduct& reduct, BallOptions opt)
{
    require(!reduct.selected.empty(), "build_tree: empty reduct");
    ConceptTree t;
    t.reduct = reduct;
    for (const auto& a : ds.attributes()) t.attribute_names.push_back(a.name);
    t.label_names = ds.label_names();
    t.points.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) t.points[i] = project(ds, reduct.selected, i);

    std::vector<std::size_t> parent_slot(ds.size(), 0); // index into frontier
    std::vector<std::size_t> frontier; // boundary nodes of the previous layer
    std::vector<std::size_t> reaching; // their samples, ascending
    for (std::size_t layer = 1; layer <= reduct.selected.size(); ++layer) {
        if (layer > 1 && reaching.empty()) break;
        AttributeSubset prefix = reduct.selected.prefix(layer);
        BallSet bs = granulate(ds, prefix, opt, reaching);
        detail::Granulator gr(ds, prefix, opt);
        std::vector<std::size_t> next_frontier, next_reaching;
        std::vector<std::size_t> next_slot(ds.size(), 0);
        for (const GranularBall& b : bs.balls) {
            const bool positive = b.pure() && !b.offender;
            // group members by parent, parents in frontier order
            std::vector<std::vector<std::size_t>> pieces(layer == 1 ? 1 : frontier.size());
            for (std::size_t i : b.members) {
                pieces[layer == 1 ? 0 : parent_slot[i]].push_back(i);
            }
            for (std::size_t s = 0; s < pieces.size(); ++s) {
                if (pieces[s].empty()) continue;
                GranularBall piece = pieces[s].size() == b.members.size() ? b : gr.make(pieces[s]);
                ConceptNode node;
                node.id = t.nodes.size();
                node.layer = layer;
                node.attributes = prefix;
                node.center = std::move(piece.center);
                node.radius = piece.radius;
                node.extent = std::move(piece.members);
                node.kind = positive ? NodeKind::positive : NodeKind::boundary;
                node.label = piece.label;
                if (layer == 1)
                    t.roots.push_back(node.id);
                else
                    t.nodes[frontier[s]].children.push_back(node.id);
                if (!positive) {
                    for (std::size_t i : node.extent) next_slot[i] = next_frontier.size();
                    next_frontier.push_back(node.id);
                    next_reaching.insert(next_reaching.end(), node.extent.begin(), node.extent.end());
                }
                t.nodes.push_back(std::move(node));
            }
        }
        std::sort(next_reaching.begin(), next_reaching.end());
        frontier = std::move(next_frontier);
        reaching = std::move(next_reaching);
        parent_slot = std::move(next_slot);
    }
    return t;
}

/// Descends the layers. At each step the nodes holding a training sample
/// that coincides with the query on the layer's attributes are taken
/// together (coincident contradictory samples sit in separate nodes with
/// the same intent); without such a sample the node minimising
/// distance(query, center) - radius wins, ties to the smaller creation
/// index. The path records the first node taken at each layer, or the
/// positive node that decided. Ending on
/// boundary nodes yields the label of the largest one, flagged not confident.
inline TreeClassification classify(const ConceptTree& tree, std::span<const double> sample)
{
    require(sample.size() == tree.attribute_names.size(), "classify: sample has wrong dimension");
    TreeClassification out;
    std::vector<std::size_t> candidates = tree.roots;
    while (!candidates.empty()) {
        const std::size_t layer = tree.nodes[candidates.front()].layer;
        std::vector<double> q(layer);
        for (std::size_t k = 0; k < layer; ++k) q[k] = sample[tree.reduct.selected[k]];

        std::vector<std::size_t> chosen;
        if (!tree.points.empty()) {
            for (std::size_t id : candidates) {
                for (std::size_t s : tree.nodes[id].extent) {
                    bool same = true;
                    for (std::size_t k = 0; k < layer && same; ++k) same = tree.points[s][k] == q[k];
                    if (same) {
                        chosen.push_back(id);
                        break;
                    }
                }
            }
        }
        if (chosen.empty()) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = candidates.front();
            for (std::size_t id : candidates) {
                const ConceptNode& nd = tree.nodes[id];
                double score = std::sqrt(detail::sqdist(q.data(), nd.center.data(), layer)) - nd.radius;
                if (score < best) {
                    best = score;
                    arg = id;
                }
            }
            chosen.push_back(arg);
        }
        out.path.push_back(chosen.front());
        for (std::size_t id : chosen) {
            if (tree.nodes[id].kind == NodeKind::positive) {
                out.path.back() = id;
                out.label = tree.nodes[id].label;
                out.confident = true;
                return out;
            }
        }
        std::size_t largest = chosen.front();
        candidates.clear();
        for (std::size_t id : chosen) {
            const ConceptNode& nd = tree.nodes[id];
            if (nd.extent.size() > tree.nodes[largest].extent.size()) largest = id;
            candidates.insert(candidates.end(), nd.children.begin(), nd.children.end());
        }
        std::sort(candidates.begin(), candidates.end());
        out.label = tree.nodes[largest].label;
        out.confident = false;
    }
    return out;
}

namespace detail {

inline std::string fixed4(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

} // namespace detail

/// Graphviz digraph, one box per concept node and one edge per parent/child link.
inline std::string export_dot(const ConceptTree& tree)
{
    std::ostringstream os;
    os << "digraph GBRCT {\n";
    os << "  rankdir=TB;\n";
    os << "  node [shape=box, style=filled, fontname=\"Helvetica\"];\n";
    os << "  label=\"layers:";
    for (std::size_t l = 1; l <= tree.layer_count(); ++l)
        os << " " << l << "=" << tree.attribute_names[tree.layer_attribute(l)];
    os << "\";\n";
    for (const ConceptNode& nd : tree.nodes) {
        os << "  n" << nd.id << " [label=\"L" << nd.layer << " ["
           << tree.attribute_names[tree.layer_attribute(nd.layer)] << "]\\nc=(";
        for (std::size_t k = 0; k < nd.center.size(); ++k)
            os << (k ? ", " : "") << detail::fixed4(nd.center[k]);
        os << ")\\nr=" << detail::fixed4(nd.radius) << "\\n|E|=" << nd.extent.size() << "\\n"
           << (nd.kind == NodeKind::positive ? tree.label_names[static_cast<std::size_t>(nd.label)] : "?")
           << "\", fillcolor=\"" << (nd.kind == NodeKind::positive ? "orange" : "lightblue")
           << "\"];\n";
    }
    for (const ConceptNode& nd : tree.nodes)
        for (std::size_t c : nd.children) os << "  n" << nd.id << " -> n" << c << ";\n";
    os << "}\n";
    return os.str();
}

inline nlohmann::json tree_to_json(const ConceptTree& tree)
{
    nlohmann::json nodes = nlohmann::json::array();
    for (const ConceptNode& nd : tree.nodes)
        nodes.push_back({{"id", nd.id},
                         {"layer", nd.layer},
                         {"attributes", nd.attributes.indexes()},
                         {"center", nd.center},
                         {"radius", nd.radius},
                         {"extent", nd.extent},
                         {"kind", nd.kind == NodeKind::positive ? "positive" : "boundary"},
                         {"label", nd.label},
                         {"children", nd.children}});
    std::vector<std::size_t> layer_attrs;
    for (std::size_t l = 1; l <= tree.layer_count(); ++l) layer_attrs.push_back(tree.layer_attribute(l));
    return {{"reduct",
             {{"oracle", tree.reduct.oracle.name()},
              {"parameters", oracle_parameters(tree.reduct.oracle)},
              {"selected", tree.reduct.selected.indexes()},
              {"gamma_trace", tree.reduct.gamma_trace}}},
            {"layer_attributes", layer_attrs},
            {"attribute_names", tree.attribute_names},
            {"label_names", tree.label_names},
            {"roots", tree.roots},
            {"nodes", std::move(nodes)},
            {"points", tree.points}};
}

inline std::string export_json(const ConceptTree& tree) { return tree_to_json(tree).dump(2) + "\n"; }

inline ConceptTree parse_tree_json(const std::string& text)
{
    try {
        auto j = nlohmann::json::parse(text);
        ConceptTree t;
        t.attribute_names = j.at("attribute_names").get<std::vector<std::string>>();
        t.label_names = j.at("label_names").get<std::vector<std::string>>();
        const std::size_t d = t.attribute_names.size();
        const auto& r = j.at("reduct");
        t.reduct.oracle = oracle_from_name(r.at("oracle").get<std::string>(), r.value("parameters", nlohmann::json::object()));
        t.reduct.selected = AttributeSubset(r.at("selected").get<std::vector<std::size_t>>(), d);
        t.reduct.gamma_trace = r.at("gamma_trace").get<std::vector<double>>();
        t.roots = j.at("roots").get<std::vector<std::size_t>>();
        t.points = j.value("points", std::vector<std::vector<double>>{});
        for (const auto& jn : j.at("nodes")) {
            ConceptNode nd;
            nd.id = jn.at("id").get<std::size_t>();
            nd.layer = jn.at("layer").get<std::size_t>();
            nd.attributes = AttributeSubset(jn.at("attributes").get<std::vector<std::size_t>>(), d);
            nd.center = jn.at("center").get<std::vector<double>>();
            nd.radius = jn.at("radius").get<double>();
            nd.extent = jn.at("extent").get<std::vector<std::size_t>>();
            nd.kind = jn.at("kind").get<std::string>() == "positive" ? NodeKind::positive : NodeKind::boundary;
            nd.label = jn.at("label").get<int>();
            nd.children = jn.at("children").get<std::vector<std::size_t>>();
            if (nd.id != t.nodes.size()) throw ParseError("tree: node ids must be dense and ordered");
            t.nodes.push_back(std::move(nd));
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("tree: ") + e.what());
    }
}

} // namespace gbrs

#endif // GBRS_GBRCT_HPP
