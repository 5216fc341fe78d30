from .registry import BundledScenario, register_scenario


@register_scenario("holonomic_reach_avoid")
class HolonomicReachAvoid(BundledScenario):
    filename = "holonomic_reach_avoid.json"
    description = "LQR-tracked holonomic robot, two-piece obstacle, goal at the final step (dt = 1 s)."


@register_scenario("holonomic_two_goals")
class HolonomicTwoGoals(BundledScenario):
    filename = "holonomic_two_goals.json"
    description = "Holonomic robot; avoid two obstacles and reach a second goal soon after the first."


@register_scenario("intersection")
class Intersection(BundledScenario):
    filename = "intersection.json"
    description = "Car crossing an intersection with a Markov-switching range sensor (linearized)."


@register_scenario("adversarial")
class Adversarial(BundledScenario):
    filename = "adversarial.json"
    description = "Regulated 2-D system; probability of eventually entering the unsafe box."


@register_scenario("rare_event")
class RareEvent(BundledScenario):
    filename = "rare_event.json"
    description = "Scalar AR(1) chain with a tail event of probability about 1e-6."


@register_scenario("data_based")
class DataBased(BundledScenario):
    filename = "data_based.json"
    description = "Reach-avoid check on a trajectory Gaussian fitted from recorded runs."
