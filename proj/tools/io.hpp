#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "etale/correspondence.hpp"
#include "etale/gmodule.hpp"
#include "etale/groupoid.hpp"
#include "etale/invsgp.hpp"
#include "etale/kformula.hpp"
#include "etale/specseq.hpp"
#include "etale/zlinalg.hpp"

// JSON schemas of the command-line tool. Readers report the JSON pointer of
// the offending value; writers emit what the readers accept.
namespace etale::cli {

using json = nlohmann::json;

class SchemaError : public std::runtime_error {
public:
  SchemaError(std::string pointer, const std::string &message)
      : std::runtime_error(message), pointer_(std::move(pointer)) {}
  const std::string &pointer() const { return pointer_; }

private:
  std::string pointer_;
};

// A JSON value with its pointer.
class Node {
public:
  Node(const json &value, std::string pointer) : value_(&value), pointer_(std::move(pointer)) {}

  const json &value() const { return *value_; }
  const std::string &pointer() const { return pointer_; }
  [[noreturn]] void fail(const std::string &message) const;

  bool has(const std::string &key) const;
  Node at(const std::string &key) const;
  std::optional<Node> get(const std::string &key) const;
  Node operator[](std::size_t k) const;
  std::size_t size() const;

  const Node &require_object() const;
  const Node &require_array() const;
  const Node &require_array(std::size_t length) const;
  std::string str() const;
  std::size_t count() const;
  long integer() const;
  zlinalg::Int number() const;
  // Index of str() in names.
  std::size_t name_in(const std::vector<std::string> &names, const char *what) const;
  std::vector<std::string> names() const;

private:
  const json *value_;
  std::string pointer_;
};

zlinalg::IntMatrix read_matrix(const Node &n, std::size_t rows, std::optional<std::size_t> cols = std::nullopt);
json write_matrix(const zlinalg::IntMatrix &m);

// {"free_rank": n, "torsion": ["d1", ...]}
zlinalg::FgAbGroup read_group(const Node &n);
json write_group(const zlinalg::FgAbGroup &g);
std::string group_text(const zlinalg::FgAbGroup &g);
json write_table(const zlinalg::GradedGroup &h);

// {"elements", "zero", "product", "star"}
invsgp::InverseSemigroup read_semigroup(const Node &n);
json write_semigroup(const invsgp::InverseSemigroup &s);
// {"vertices", "edges": [{"name", "src", "dst"}]}
invsgp::Digraph read_digraph(const Node &n);
json write_digraph(const invsgp::Digraph &g);
// A semigroup, or a digraph standing for its graph inverse semigroup.
invsgp::InverseSemigroup read_semigroup_or_graph(const Node &n);

// {"units", "arrows": [{"name", "range", "source", "inverse"}], "product": [[g, h, gh]]}
// Arrows and products list non-unit arrows only.
groupoid::FiniteGroupoid read_groupoid(const Node &n);
json write_groupoid(const groupoid::FiniteGroupoid &g);

// {"semigroup", "points", "maps": {element: {point: point}}}
groupoid::SAction read_action(const Node &n);
json write_action(const groupoid::SAction &a);

// {"fibres": [{"unit", "generators", "presentation"}], "action": [{"arrow", "matrix"}]}
// or {"constant": group}.
gmodule::GModule read_module(const Node &n, const groupoid::FiniteGroupoid &g);
json write_module(const gmodule::GModule &m);

// {"left", "right", "points", "rho", "sigma", "left_action": [[g, w, gw]],
//  "right_action": [[w, h, wh]]}
correspondence::Correspondence read_correspondence(const Node &n);
json write_correspondence(const correspondence::Correspondence &c);
json write_correspondence_report(const correspondence::CorrespondenceReport &r);

// "units", "whole" or {"members": [{"label", "correspondence"}]}.
correspondence::EmbeddingFamily read_family(const Node &n, const groupoid::FiniteGroupoid &ambient);
json write_family(const correspondence::EmbeddingFamily &f);

// {"min_degree", "ranks", "differentials", "levels"}
specseq::FilteredComplex read_filtered_complex(const Node &n);
json write_filtered_complex(const specseq::FilteredComplex &fc);

json write_kclass(const kformula::KClass &k);
json write_page(const specseq::Page &e, const std::optional<specseq::Window> &window);

}  // namespace etale::cli
