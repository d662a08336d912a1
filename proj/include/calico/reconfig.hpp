#ifndef CALICO_RECONFIG_HPP
#define CALICO_RECONFIG_HPP

#include <string>
#include <vector>

#include "calico/model.hpp"
#include "calico/plan.hpp"

namespace calico {

/// One construction or destruction step, self-contained: add ops carry the
/// full element, remove ops carry the name or id.
struct ReconfigOp {
    enum class Kind {
        DetachProbe,
        RemoveConnector,
        RemoveComponent,
        AddComponent,
        AddConnector,
        AttachProbe,
    };

    Kind kind = Kind::AddComponent;
    Component component;  // AddComponent
    Connector connector;  // AddConnector
    Probe probe;          // AttachProbe
    std::string name;     // RemoveComponent / RemoveConnector / DetachProbe

    static ReconfigOp add_component(Component c);
    static ReconfigOp remove_component(std::string name);
    static ReconfigOp add_connector(Connector k);
    static ReconfigOp remove_connector(std::string id);
    static ReconfigOp attach_probe(Probe p);
    static ReconfigOp detach_probe(std::string id);

    /// Short human-readable form, e.g. "add-connector c_display".
    std::string describe() const;

    friend bool operator==(const ReconfigOp&, const ReconfigOp&) = default;
};

/// An ordered edit script. Ops are sorted destruction-first so that every
/// op's precondition holds when it runs:
/// DetachProbe < RemoveConnector < RemoveComponent < AddComponent <
/// AddConnector < AttachProbe, ties by name/id.
struct ModelDiff {
    std::vector<ReconfigOp> ops;

    bool empty() const { return ops.empty(); }
    std::string to_json() const;

    friend bool operator==(const ModelDiff&, const ModelDiff&) = default;
};

}  // namespace calico

#endif  // CALICO_RECONFIG_HPP
