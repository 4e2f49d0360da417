use kpp_sharp::flow::{drift_interface, FlowMap, Interface};
use kpp_sharp::model::{ChemoFieldSpec, ChemoTerm, Domain, Envelope, Params};

fn bump() -> ChemoFieldSpec {
    let term = ChemoTerm {
        amplitude: 0.02,
        center: [0.55, 0.5],
        width: 0.3,
        envelope: Envelope::Constant,
    };
    ChemoFieldSpec::new(2, [0.5, 0.5], 0.49, vec![term], Vec::new()).unwrap()
}

#[test]
fn forward_then_backward_returns_to_the_start() {
    let map = FlowMap::new(bump(), 1e-3).unwrap();
    for x in [[0.3, 0.4], [0.5, 0.5], [0.62, 0.71]] {
        let y = map.map(0.0, 0.2, x);
        let back = map.map(0.2, 0.0, y);
        assert!((back[0] - x[0]).hypot(back[1] - x[1]) < 1e-8);
    }
}

#[test]
fn zero_field_leaves_the_interface_in_place() {
    let domain = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
    let params = Params::new(0.02, 2.0, 0.2, 0.1, domain, 0.05).unwrap();
    let map = FlowMap::new(ChemoFieldSpec::zero(2), 1e-3).unwrap();
    let gamma = Interface::circle([0.5, 0.5], 0.2, 64);
    let drifted = drift_interface(&gamma, &map, &params).unwrap();
    assert!(gamma.hausdorff(&drifted) < 1e-14);
}
